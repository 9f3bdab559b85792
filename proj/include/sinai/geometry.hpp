#pragma once

#include "sinai/common.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace sinai {

/// Point on the unit torus, coordinates reduced mod 1.
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;

    static TorusPoint reduced(double x, double y) {
        return {x - std::floor(x), y - std::floor(y)};
    }
};

/// Circular scatterer. Circles are the only supported shape: strictly
/// positive curvature, closed-form ray intersection, exact corridor checks.
struct Scatterer {
    Vec2 center;
    double radius = 0.0;
    int id = 0;

    double perimeter() const { return kTwoPi * radius; }
};

/// Boundary coordinates of the particle right after a collision:
/// scatterer index, arc-length position r in [0, perimeter), and the signed
/// angle phi in [-pi/2, pi/2] between the outgoing velocity and the outward
/// normal (counterclockwise positive). Arc origin is the positive-x
/// direction from the circle's center.
struct PhasePoint {
    int scatterer = 0;
    double r = 0.0;
    double phi = 0.0;
};

struct CollisionRecord {
    PhasePoint from;
    PhasePoint to;
    double flight_length = 0.0;
};

/// Embedded chart of a PhasePoint: torus position, unit outgoing velocity,
/// unit outward normal.
struct BoundaryFrame {
    TorusPoint position;
    Vec2 velocity;
    Vec2 normal;
};

struct CorridorInfo {
    int p = 0;
    int q = 0;
    double clear_width = 0.0; ///< uncovered strip width; > 0 means open
};

struct HorizonReport {
    bool finite = false;
    double tau_max = 0.0; ///< certified bound: 1.1 x max observed free path
    CorridorInfo worst_corridor;
    double max_free_path = 0.0;
    int p_max = 0;
    std::int64_t n_rays = 0;
};

/// Immutable scatterer layout on the unit torus plus a free-path bound.
/// Construction checks pairwise disjointness (under all torus translations)
/// and precomputes, per source scatterer, the lattice-unfolded candidate
/// list used by the collision map. Freely shareable across threads.
class BilliardTable {
  public:
    /// `horizon_bound` is the search cap for ray tracing. Use
    /// make_validated_table() to obtain a certified bound.
    BilliardTable(std::vector<Scatterer> scatterers, double horizon_bound);

    const std::vector<Scatterer>& scatterers() const { return scatterers_; }
    const Scatterer& scatterer(int id) const { return scatterers_[id]; }
    double horizon_bound() const { return horizon_bound_; }
    double perimeter_total() const { return perimeter_total_; }
    /// Cumulative perimeter up to (and including) scatterer i.
    const std::vector<double>& perimeter_cumulative() const { return perim_cum_; }

    /// Same layout with a different horizon bound (rebuilds candidates).
    BilliardTable with_horizon(double tau) const;

    struct Candidate {
        Vec2 offset; ///< candidate center relative to the source center
        double radius = 0.0;
        int scatterer = 0;
        double min_dist = 0.0; ///< lower bound on flight length to this circle
    };
    const std::vector<Candidate>& candidates(int source) const {
        return candidates_[source];
    }

  private:
    std::vector<Scatterer> scatterers_;
    double horizon_bound_;
    double perimeter_total_ = 0.0;
    std::vector<double> perim_cum_;
    std::vector<std::vector<Candidate>> candidates_;

    void check_disjoint() const;
    void build_candidates();
};

BoundaryFrame boundary_embed(const BilliardTable& table, const PhasePoint& p);

/// Next collision of the ray leaving `p`. Throws GrazingCollision on a
/// tangential hit (discriminant within 1e-12) and NoCollisionWithinHorizon
/// if nothing is hit within the table's horizon bound.
CollisionRecord collision_map(const BilliardTable& table, const PhasePoint& p);

/// Previous collision, computed as R o T o R with R(r,phi) = (r,-phi).
CollisionRecord inverse_collision_map(const BilliardTable& table, const PhasePoint& p);

/// T^n for signed n by repeated (inverse_)collision_map. Collision errors
/// are rethrown with the failing step index attached.
PhasePoint iterate(const BilliardTable& table, PhasePoint p, long n);

/// Analytic corridor check over rational directions |p|,|q| <= p_max plus a
/// stochastic free-path probe with n_rays samples. Does not throw on an
/// infinite-horizon layout; the verdict is in the report.
HorizonReport validate_table(const BilliardTable& table, int p_max,
                             std::int64_t n_rays, std::uint64_t seed = 0x5EEDull);

/// Builds a table, validates it, and installs the certified tau_max.
/// Throws InfiniteHorizonDetected when an open corridor exists.
std::pair<BilliardTable, HorizonReport>
make_validated_table(std::vector<Scatterer> scatterers, int p_max = 5,
                     std::int64_t n_rays = 200000, std::uint64_t seed = 0x5EEDull);

/// Default two-disk layout: radius 0.4 at (0,0), radius 0.2 at (0.5,0.5).
std::vector<Scatterer> reference_scatterers();

/// Validated reference table (cached; built on first use).
const BilliardTable& reference_table();

} // namespace sinai
