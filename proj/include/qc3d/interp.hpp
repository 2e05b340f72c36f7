#pragma once

#include "qc3d/lbs3d.hpp"
#include "qc3d/mesh.hpp"
#include "qc3d/qcrep.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qc3d {

// Density control for volumetric point seeding around a keyframe surface.
struct SeedingConfig {
    double sigma = 0.05;   // Poisson-disk radius
    double kappa = 0.0;    // far-field sparsity weight (1/length)
    std::uint64_t seed = 0;
};

// Uniform-grid nearest-neighbour index over a fixed point set.
class PointIndex {
  public:
    explicit PointIndex(std::vector<Vec3> points);
    double min_distance(const Vec3& p) const;
    const std::vector<Vec3>& points() const { return points_; }

  private:
    std::vector<Vec3> points_;
    std::vector<std::vector<int>> cells_;
    Vec3 origin_;
    double cell_size_ = 1.0;
    int dims_[3] = {1, 1, 1};

    int cell_of(int ix, int iy, int iz) const { return (iz * dims_[1] + iy) * dims_[0] + ix; }
};

// Prob(p) = min(1, d/sigma) * exp(-kappa d) with d the distance from p to the
// nearest surface vertex: suppresses points hugging the surface and, with
// kappa > 0, points far from it.
double keep_probability(const Vec3& p, const PointIndex& surface, const SeedingConfig& cfg);

// Bridson dart throwing in the box [lo, hi], minimum spacing `radius`.
// Deterministic for a fixed seed.
std::vector<Vec3> poisson_disk_sample(const Vec3& lo, const Vec3& hi, double radius, std::uint64_t seed,
                                      int attempts_per_point = 30);

// Keeps candidate p iff uniform(seed) < keep_probability(p). One draw per
// candidate in order, so the output is reproducible.
std::vector<Vec3> filter_samples(std::span<const Vec3> candidates, const PointIndex& surface,
                                 const SeedingConfig& cfg);

// Uniformly rescales the points into [margin, 1-margin]^3 (preserving aspect
// ratio, centered). Returns scale/offset so the transform can be replayed:
// p' = (p - offset) * scale + 0.5.
struct UnitCubeTransform {
    double scale = 1.0;
    Vec3 offset{0, 0, 0};

    Vec3 apply(const Vec3& p) const { return (p - offset) * scale + Vec3{0.5, 0.5, 0.5}; }
};
UnitCubeTransform normalize_to_unit_cube(std::span<Vec3> points, double margin = 0.1);

// Frame parameters t_0 = 0 < t_1 < ... < t_F = 1.
struct InterpolationSchedule {
    std::vector<double> t;

    static InterpolationSchedule uniform(int frames);
    void validate() const;
    int frame_count() const { return static_cast<int>(t.size()); }
};

// Componentwise blend toward the identity representation:
// q_t = (1-t) (1,0,0,1,0,1) + t q. Convexity keeps every rebuilt P SPD.
QCRep interpolate_rep(const QCRep& rep, double t);

enum class LandmarkMode {
    endpoints_only,  // landmarks constrained only at t = 0 and t = 1
    every_frame,     // landmarks constrained (blended) at every frame
};

struct InterpOptions {
    std::vector<int> landmarks;  // extra constrained vertices (surface embedding)
    LandmarkMode landmark_mode = LandmarkMode::endpoints_only;
    RepOptions rep;
    CgOptions solve;
};

struct Frame {
    double t = 0.0;
    Mapping mapping;
    std::vector<int> folded;  // fold check result (warning, not an error)
    ReconstructReport report;
};

// One frame at parameter t: blend `rep` toward the identity, rebuild the
// boundary data (boundary vertices at (1-t) source + t target, landmarks per
// the mode) and reconstruct. `rep` is the representation of `mapping`.
Frame generate_frame(const Mapping& mapping, const QCRep& rep, double t, const InterpOptions& opts = {});

// Computes the representation of `mapping` once, then generate_frame for each
// schedule entry.
std::vector<Frame> generate_frames(const Mapping& mapping, const InterpolationSchedule& schedule,
                                   const InterpOptions& opts = {});

}  // namespace qc3d
