#include "sinai/geometry.hpp"

#include "sinai/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>

namespace sinai {

namespace {

constexpr double kGrazeEps = 1e-12; ///< discriminant tolerance for tangency

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// BilliardTable
// ---------------------------------------------------------------------------

BilliardTable::BilliardTable(std::vector<Scatterer> scatterers, double horizon_bound)
    : scatterers_(std::move(scatterers)), horizon_bound_(horizon_bound) {
    if (scatterers_.empty()) {
        throw Error("billiard table needs at least one scatterer");
    }
    if (!(horizon_bound_ > 0.0)) {
        throw Error("horizon bound must be positive");
    }
    perim_cum_.reserve(scatterers_.size());
    for (std::size_t i = 0; i < scatterers_.size(); ++i) {
        Scatterer& s = scatterers_[i];
        s.id = static_cast<int>(i);
        if (!(s.radius > 0.0)) {
            throw Error("scatterer radius must be positive");
        }
        s.center = {s.center.x - std::floor(s.center.x),
                    s.center.y - std::floor(s.center.y)};
        perimeter_total_ += s.perimeter();
        perim_cum_.push_back(perimeter_total_);
    }
    check_disjoint();
    build_candidates();
}

void BilliardTable::check_disjoint() const {
    const double tol = 1e-12;
    for (std::size_t i = 0; i < scatterers_.size(); ++i) {
        for (std::size_t j = i; j < scatterers_.size(); ++j) {
            for (int dx = -2; dx <= 2; ++dx) {
                for (int dy = -2; dy <= 2; ++dy) {
                    if (i == j && dx == 0 && dy == 0) continue;
                    const Vec2 d{scatterers_[j].center.x + dx - scatterers_[i].center.x,
                                 scatterers_[j].center.y + dy - scatterers_[i].center.y};
                    const double min_sep =
                        scatterers_[i].radius + scatterers_[j].radius;
                    if (d.norm() < min_sep + tol) {
                        throw OverlappingScatterers(fmt(
                            "scatterers overlap or touch: ids %.0f and %.0f, "
                            "gap %.3e", double(i), double(j), d.norm() - min_sep));
                    }
                }
            }
        }
    }
}

void BilliardTable::build_candidates() {
    candidates_.assign(scatterers_.size(), {});
    for (std::size_t s = 0; s < scatterers_.size(); ++s) {
        const Scatterer& src = scatterers_[s];
        auto& list = candidates_[s];
        for (const Scatterer& tgt : scatterers_) {
            // A ray from the boundary of `src` reaches the translate of
            // `tgt` at offset t only if |c_tgt + t - c_src| <= horizon +
            // R_src + R_tgt, which bounds the lattice search box.
            const double reach = horizon_bound_ + src.radius + tgt.radius;
            const Vec2 base{tgt.center.x - src.center.x, tgt.center.y - src.center.y};
            const int span = static_cast<int>(std::ceil(reach + base.norm())) + 1;
            for (int dx = -span; dx <= span; ++dx) {
                for (int dy = -span; dy <= span; ++dy) {
                    if (tgt.id == src.id && dx == 0 && dy == 0) {
                        continue; // a forward ray never re-hits its own circle
                    }
                    const Vec2 offset{base.x + dx, base.y + dy};
                    const double min_dist =
                        offset.norm() - src.radius - tgt.radius;
                    if (min_dist > horizon_bound_) continue;
                    list.push_back({offset, tgt.radius, tgt.id,
                                    std::max(min_dist, 0.0)});
                }
            }
        }
        std::sort(list.begin(), list.end(),
                  [](const Candidate& a, const Candidate& b) {
                      return a.min_dist < b.min_dist;
                  });
    }
}

BilliardTable BilliardTable::with_horizon(double tau) const {
    return BilliardTable(scatterers_, tau);
}

// ---------------------------------------------------------------------------
// Collision map
// ---------------------------------------------------------------------------

BoundaryFrame boundary_embed(const BilliardTable& table, const PhasePoint& p) {
    const Scatterer& s = table.scatterer(p.scatterer);
    const double psi = p.r / s.radius;
    const Vec2 n{std::cos(psi), std::sin(psi)};
    BoundaryFrame f;
    f.normal = n;
    f.position = TorusPoint::reduced(s.center.x + s.radius * n.x,
                                     s.center.y + s.radius * n.y);
    f.velocity = {std::cos(psi + p.phi), std::sin(psi + p.phi)};
    return f;
}

CollisionRecord collision_map(const BilliardTable& table, const PhasePoint& p) {
    const Scatterer& src = table.scatterer(p.scatterer);
    const double psi = p.r / src.radius;
    // Work in coordinates centered on the source scatterer: the ray origin
    // is on the source circle and candidate offsets are precomputed
    // relative to the same center.
    const Vec2 origin{src.radius * std::cos(psi), src.radius * std::sin(psi)};
    const double ang = psi + p.phi;
    const Vec2 v{std::cos(ang), std::sin(ang)};

    double best_t = std::numeric_limits<double>::infinity();
    double graze_t = std::numeric_limits<double>::infinity();
    const BilliardTable::Candidate* best = nullptr;

    for (const auto& cand : table.candidates(p.scatterer)) {
        if (cand.min_dist >= best_t) break; // sorted: nothing closer remains
        const Vec2 d{cand.offset.x - origin.x, cand.offset.y - origin.y};
        const double k = d.dot(v);
        if (k <= 0.0) continue; // circle is behind the ray
        const double c0 = d.norm_sq() - cand.radius * cand.radius;
        const double disc = k * k - c0;
        if (disc > kGrazeEps) {
            const double t = k - std::sqrt(disc);
            if (t < best_t) {
                best_t = t;
                best = &cand;
            }
        } else if (disc > -kGrazeEps) {
            graze_t = std::min(graze_t, k); // tangent point parameter
        }
    }

    if (graze_t < best_t && graze_t <= table.horizon_bound()) {
        throw GrazingCollision(fmt(
            "tangential ray-circle intersection at flight length %.6g", graze_t));
    }
    if (best == nullptr || best_t > table.horizon_bound()) {
        throw NoCollisionWithinHorizon(fmt(
            "no collision within horizon bound %.6g", table.horizon_bound()));
    }

    // Hit point relative to the struck circle's center.
    const Vec2 hit{origin.x + best_t * v.x - best->offset.x,
                   origin.y + best_t * v.y - best->offset.y};
    const Vec2 n = hit.normalized();
    const double vn = v.dot(n);
    const Vec2 refl{v.x - 2.0 * vn * n.x, v.y - 2.0 * vn * n.y};

    double psi_out = std::atan2(n.y, n.x);
    if (psi_out < 0.0) psi_out += kTwoPi;
    if (psi_out >= kTwoPi) psi_out = 0.0;

    CollisionRecord rec;
    rec.from = p;
    rec.to.scatterer = best->scatterer;
    rec.to.r = best->radius * psi_out;
    rec.to.phi = std::atan2(n.cross(refl), n.dot(refl));
    rec.flight_length = best_t;
    return rec;
}

CollisionRecord inverse_collision_map(const BilliardTable& table, const PhasePoint& p) {
    // Time reversal: with R(r, phi) = (r, -phi) the inverse map is R o T o R.
    const PhasePoint rp{p.scatterer, p.r, -p.phi};
    CollisionRecord rec = collision_map(table, rp);
    rec.from = p;
    rec.to.phi = -rec.to.phi;
    return rec;
}

PhasePoint iterate(const BilliardTable& table, PhasePoint p, long n) {
    const bool forward = n >= 0;
    const long steps = forward ? n : -n;
    for (long i = 0; i < steps; ++i) {
        try {
            p = forward ? collision_map(table, p).to
                        : inverse_collision_map(table, p).to;
        } catch (GrazingCollision& g) {
            g.step = forward ? i : -i - 1;
            throw;
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Horizon validation
// ---------------------------------------------------------------------------

namespace {

/// Largest uncovered arc on a circle of circumference w partially covered
/// by intervals [c_i - h_i, c_i + h_i] (mod w). Returns a negative slack
/// (w minus total interval length) when the circle is fully covered.
double corridor_clear_width(double w, const std::vector<std::pair<double, double>>& iv) {
    double total_len = 0.0;
    bool single_wraps = false;
    for (const auto& [c, h] : iv) {
        (void)c;
        total_len += 2.0 * h;
        single_wraps = single_wraps || 2.0 * h >= w;
    }
    if (single_wraps) return w - total_len;
    // Unroll the circle: reduce starts into [0, w), add copies shifted by
    // +-w, and sweep one full period anchored at the first reduced start.
    // Three copies are enough because every interval is shorter than w.
    std::vector<std::pair<double, double>> segs;
    segs.reserve(3 * iv.size());
    for (const auto& [c, h] : iv) {
        double a = std::fmod(c - h, w);
        if (a < 0.0) a += w;
        const double b = a + 2.0 * h;
        segs.emplace_back(a - w, b - w);
        segs.emplace_back(a, b);
        segs.emplace_back(a + w, b + w);
    }
    std::sort(segs.begin(), segs.end());
    const double t0 = segs[iv.size()].first; // smallest start in [0, w)
    const double window_end = t0 + w;
    double cover_end = t0;
    double max_gap = 0.0;
    for (const auto& [a, b] : segs) {
        if (a >= window_end) break;
        if (a > cover_end) max_gap = std::max(max_gap, a - cover_end);
        cover_end = std::max(cover_end, b);
        if (cover_end >= window_end) break;
    }
    if (cover_end < window_end) {
        max_gap = std::max(max_gap, window_end - cover_end);
    }
    if (max_gap > 0.0) return max_gap;
    return w - total_len;
}

std::vector<std::pair<int, int>> corridor_directions(int p_max) {
    std::vector<std::pair<int, int>> dirs = {{1, 0}, {0, 1}};
    std::vector<std::pair<int, int>> rest;
    for (int p = 1; p <= p_max; ++p) {
        for (int q = 1; q <= p_max; ++q) {
            if (std::gcd(p, q) != 1) continue;
            rest.emplace_back(p, q);
            rest.emplace_back(p, -q);
        }
    }
    std::sort(rest.begin(), rest.end(), [](auto a, auto b) {
        const int sa = a.first + std::abs(a.second);
        const int sb = b.first + std::abs(b.second);
        if (sa != sb) return sa < sb;
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second; // +q before -q
    });
    dirs.insert(dirs.end(), rest.begin(), rest.end());
    return dirs;
}

} // namespace

HorizonReport validate_table(const BilliardTable& table, int p_max,
                             std::int64_t n_rays, std::uint64_t seed) {
    HorizonReport rep;
    rep.p_max = p_max;
    rep.n_rays = n_rays;

    // Analytic part: a direction (p, q) carries an open corridor iff the
    // scatterer shadows fail to cover the transverse circle of
    // circumference 1/sqrt(p^2+q^2). Coprime directions up to p_max cover
    // every corridor wider than the largest scatterer diameter.
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& [p, q] : corridor_directions(p_max)) {
        const double len = std::sqrt(double(p) * p + double(q) * q);
        const double w = 1.0 / len;
        const Vec2 nrm{-q / len, p / len};
        std::vector<std::pair<double, double>> iv;
        iv.reserve(table.scatterers().size());
        for (const Scatterer& s : table.scatterers()) {
            iv.emplace_back(s.center.dot(nrm), s.radius);
        }
        const double clear = corridor_clear_width(w, iv);
        if (clear > worst) {
            worst = clear;
            rep.worst_corridor = {p, q, clear};
        }
    }
    rep.finite = rep.worst_corridor.clear_width <= 0.0;
    if (!rep.finite) {
        rep.tau_max = std::numeric_limits<double>::infinity();
        rep.max_free_path = std::numeric_limits<double>::infinity();
        return rep;
    }

    // Stochastic part: probe the maximum free path with uniformly spread
    // boundary rays, enlarging the working horizon until no ray is
    // censored at the bound.
    RngStream rng(seed, 0);
    double bound = table.horizon_bound();
    const BilliardTable* probe = &table;
    BilliardTable enlarged = table; // reassigned when the bound grows
    double max_path = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        max_path = 0.0;
        bool censored = false;
        for (std::int64_t i = 0; i < n_rays && !censored; ++i) {
            // Scatterer by perimeter, arc position uniform, direction
            // uniform in the outgoing half-plane: near-tangential rays are
            // the ones that find long corridor flights.
            const double u = rng.uniform(0.0, probe->perimeter_total());
            const auto& cum = probe->perimeter_cumulative();
            const int sc = static_cast<int>(
                std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
            PhasePoint start;
            start.scatterer = std::min<int>(sc, int(cum.size()) - 1);
            start.r = rng.uniform(0.0, probe->scatterer(start.scatterer).perimeter());
            start.phi = rng.uniform(-kHalfPi, kHalfPi);
            try {
                max_path = std::max(max_path,
                                    collision_map(*probe, start).flight_length);
            } catch (const NoCollisionWithinHorizon&) {
                censored = true;
            } catch (const GrazingCollision&) {
                // measure-zero tangency; skip the ray
            }
        }
        if (!censored) break;
        bound *= 2.0;
        enlarged = table.with_horizon(bound);
        probe = &enlarged;
        if (attempt == 7) {
            throw NoCollisionWithinHorizon(fmt(
                "free-path probe still censored at horizon %.6g; corridor "
                "check up to p_max=%.0f may be too coarse",
                bound, double(p_max)));
        }
    }
    rep.max_free_path = max_path;
    rep.tau_max = 1.1 * max_path;
    return rep;
}

std::pair<BilliardTable, HorizonReport>
make_validated_table(std::vector<Scatterer> scatterers, int p_max,
                     std::int64_t n_rays, std::uint64_t seed) {
    BilliardTable provisional(std::move(scatterers), 4.0);
    HorizonReport rep = validate_table(provisional, p_max, n_rays, seed);
    if (!rep.finite) {
        const auto& c = rep.worst_corridor;
        throw InfiniteHorizonDetected(
            fmt("open corridor of width %.6g in direction (%.0f, %.0f)",
                c.clear_width, double(c.p), double(c.q)),
            c.p, c.q);
    }
    return {provisional.with_horizon(rep.tau_max), rep};
}

std::vector<Scatterer> reference_scatterers() {
    return {{{0.0, 0.0}, 0.4, 0}, {{0.5, 0.5}, 0.2, 1}};
}

const BilliardTable& reference_table() {
    static const BilliardTable table = [] {
        return make_validated_table(reference_scatterers()).first;
    }();
    return table;
}

} // namespace sinai
