#include "qc3d/interp.hpp"

#include "qc3d/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qc3d {

PointIndex::PointIndex(std::vector<Vec3> points) : points_(std::move(points)) {
    if (points_.empty()) throw Error(ErrorCode::invalid_argument, "PointIndex needs at least one point");
    Vec3 lo = points_[0], hi = points_[0];
    for (const Vec3& p : points_)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z, 1e-12});
    // Aim at a handful of points per cell.
    const double target = extent / std::max(1.0, std::cbrt(static_cast<double>(points_.size())));
    cell_size_ = std::max(target, 1e-12);
    origin_ = lo;
    for (int a = 0; a < 3; ++a) {
        dims_[a] = std::max(1, static_cast<int>(std::floor((hi[a] - lo[a]) / cell_size_)) + 1);
        dims_[a] = std::min(dims_[a], 256);
    }
    cells_.assign(static_cast<std::size_t>(dims_[0]) * static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(dims_[2]), {});
    for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
        const Vec3& p = points_[static_cast<std::size_t>(i)];
        int c[3];
        for (int a = 0; a < 3; ++a)
            c[a] = std::clamp(static_cast<int>(std::floor((p[a] - origin_[a]) / cell_size_)), 0, dims_[a] - 1);
        cells_[static_cast<std::size_t>(cell_of(c[0], c[1], c[2]))].push_back(i);
    }
}

double PointIndex::min_distance(const Vec3& p) const {
    int c[3];
    for (int a = 0; a < 3; ++a)
        c[a] = std::clamp(static_cast<int>(std::floor((p[a] - origin_[a]) / cell_size_)), 0, dims_[a] - 1);

    double best_sq = std::numeric_limits<double>::infinity();
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int ring = 0; ring <= max_ring; ++ring) {
        // Once a hit exists, cells beyond (ring - 1) * cell_size cannot beat it.
        if (std::isfinite(best_sq)) {
            const double shell = (static_cast<double>(ring) - 1.0) * cell_size_;
            if (shell > 0.0 && shell * shell > best_sq) break;
        }
        bool visited = false;
        for (int dz = -ring; dz <= ring; ++dz)
            for (int dy = -ring; dy <= ring; ++dy)
                for (int dx = -ring; dx <= ring; ++dx) {
                    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring) continue;
                    const int ix = c[0] + dx, iy = c[1] + dy, iz = c[2] + dz;
                    if (ix < 0 || iy < 0 || iz < 0 || ix >= dims_[0] || iy >= dims_[1] || iz >= dims_[2]) continue;
                    visited = true;
                    for (int i : cells_[static_cast<std::size_t>(cell_of(ix, iy, iz))]) {
                        const Vec3 d = points_[static_cast<std::size_t>(i)] - p;
                        best_sq = std::min(best_sq, dot(d, d));
                    }
                }
        if (!visited && std::isfinite(best_sq)) break;
    }
    return std::sqrt(best_sq);
}

double keep_probability(const Vec3& p, const PointIndex& surface, const SeedingConfig& cfg) {
    if (!(cfg.sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "seeding sigma must be positive");
    if (cfg.kappa < 0.0) throw Error(ErrorCode::invalid_argument, "seeding kappa must be >= 0");
    const double d = surface.min_distance(p);
    return std::min(1.0, d / cfg.sigma) * std::exp(-cfg.kappa * d);
}

std::vector<Vec3> poisson_disk_sample(const Vec3& lo, const Vec3& hi, double radius, std::uint64_t seed,
                                      int attempts_per_point) {
    if (!(radius > 0.0)) throw Error(ErrorCode::invalid_argument, "poisson disk radius must be positive");
    for (int a = 0; a < 3; ++a)
        if (!(hi[a] > lo[a])) throw Error(ErrorCode::invalid_argument, "poisson disk domain is empty");

    const double cell = radius / std::sqrt(3.0);
    int dims[3];
    for (int a = 0; a < 3; ++a) dims[a] = std::max(1, static_cast<int>(std::ceil((hi[a] - lo[a]) / cell)));
    std::vector<int> grid(static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]), -1);
    auto cell_index = [&](const Vec3& p) {
        int c[3];
        for (int a = 0; a < 3; ++a)
            c[a] = std::clamp(static_cast<int>(std::floor((p[a] - lo[a]) / cell)), 0, dims[a] - 1);
        return std::array<int, 3>{c[0], c[1], c[2]};
    };

    std::vector<Vec3> samples;
    std::vector<int> active;
    Rng rng(seed ^ 0x9D2C5680u);

    auto far_enough = [&](const Vec3& p) {
        const auto c = cell_index(p);
        for (int dz = -2; dz <= 2; ++dz)
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    const int ix = c[0] + dx, iy = c[1] + dy, iz = c[2] + dz;
                    if (ix < 0 || iy < 0 || iz < 0 || ix >= dims[0] || iy >= dims[1] || iz >= dims[2]) continue;
                    const int idx = grid[static_cast<std::size_t>((iz * dims[1] + iy) * dims[0] + ix)];
                    if (idx >= 0) {
                        const Vec3 d = samples[static_cast<std::size_t>(idx)] - p;
                        if (dot(d, d) < radius * radius) return false;
                    }
                }
        return true;
    };
    auto insert = [&](const Vec3& p) {
        const auto c = cell_index(p);
        grid[static_cast<std::size_t>((c[2] * dims[1] + c[1]) * dims[0] + c[0])] = static_cast<int>(samples.size());
        active.push_back(static_cast<int>(samples.size()));
        samples.push_back(p);
    };

    insert({rng.next_double(lo.x, hi.x), rng.next_double(lo.y, hi.y), rng.next_double(lo.z, hi.z)});
    while (!active.empty()) {
        const std::size_t pick = static_cast<std::size_t>(rng.next_below(active.size()));
        const Vec3 center = samples[static_cast<std::size_t>(active[pick])];
        bool found = false;
        for (int a = 0; a < attempts_per_point; ++a) {
            // Uniform in the spherical shell [radius, 2 radius).
            const double u = rng.next_double();
            const double r = radius * std::cbrt(1.0 + 7.0 * u);  // r^3 uniform in [r0^3, 8 r0^3)
            const double cos_t = 2.0 * rng.next_double() - 1.0;
            const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
            const double phi = 2.0 * M_PI * rng.next_double();
            const Vec3 cand = center + Vec3{r * sin_t * std::cos(phi), r * sin_t * std::sin(phi), r * cos_t};
            if (cand.x < lo.x || cand.y < lo.y || cand.z < lo.z || cand.x > hi.x || cand.y > hi.y || cand.z > hi.z)
                continue;
            if (far_enough(cand)) {
                insert(cand);
                found = true;
                break;
            }
        }
        if (!found) {
            active[pick] = active.back();
            active.pop_back();
        }
    }
    return samples;
}

std::vector<Vec3> filter_samples(std::span<const Vec3> candidates, const PointIndex& surface,
                                 const SeedingConfig& cfg) {
    Rng rng(cfg.seed ^ 0xA511E9B3u);
    std::vector<Vec3> kept;
    kept.reserve(candidates.size());
    for (const Vec3& p : candidates) {
        const double prob = keep_probability(p, surface, cfg);
        if (rng.next_double() < prob) kept.push_back(p);
    }
    return kept;
}

UnitCubeTransform normalize_to_unit_cube(std::span<Vec3> points, double margin) {
    if (points.empty()) throw Error(ErrorCode::invalid_argument, "normalize_to_unit_cube: no points");
    if (!(margin >= 0.0 && margin < 0.5))
        throw Error(ErrorCode::invalid_argument, "normalize_to_unit_cube: margin must be in [0, 0.5)");
    Vec3 lo = points[0], hi = points[0];
    for (const Vec3& p : points)
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    UnitCubeTransform tr;
    tr.scale = extent > 0.0 ? (1.0 - 2.0 * margin) / extent : 1.0;
    tr.offset = (lo + hi) * 0.5;
    for (Vec3& p : points) p = tr.apply(p);
    return tr;
}

InterpolationSchedule InterpolationSchedule::uniform(int frames) {
    if (frames < 2) throw Error(ErrorCode::invalid_argument, "schedule needs at least 2 frames");
    InterpolationSchedule s;
    s.t.resize(static_cast<std::size_t>(frames));
    for (int i = 0; i < frames; ++i) s.t[static_cast<std::size_t>(i)] = static_cast<double>(i) / (frames - 1);
    return s;
}

void InterpolationSchedule::validate() const {
    if (t.size() < 2) throw Error(ErrorCode::invalid_argument, "schedule needs at least 2 frames");
    if (t.front() != 0.0 || t.back() != 1.0)
        throw Error(ErrorCode::invalid_argument, "schedule must start at 0 and end at 1");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw Error(ErrorCode::invalid_argument, "schedule parameters must be strictly increasing");
}

QCRep interpolate_rep(const QCRep& rep, double t) {
    QCRep out;
    out.q.resize(rep.q.size());
    for (std::size_t i = 0; i < rep.q.size(); ++i)
        for (int c = 0; c < 6; ++c)
            out.q[i][static_cast<std::size_t>(c)] =
                (1.0 - t) * kIdentityQ[static_cast<std::size_t>(c)] + t * rep.q[i][static_cast<std::size_t>(c)];
    return out;
}

Frame generate_frame(const Mapping& mapping, const QCRep& rep, double t, const InterpOptions& opts) {
    std::vector<int> landmarks = opts.landmarks;
    std::sort(landmarks.begin(), landmarks.end());
    landmarks.erase(std::unique(landmarks.begin(), landmarks.end()), landmarks.end());
    for (int v : landmarks)
        if (v < 0 || v >= mapping.mesh->vertex_count())
            throw Error(ErrorCode::invalid_argument, "landmark index " + std::to_string(v) + " out of range");

    std::vector<std::uint8_t> on_boundary(static_cast<std::size_t>(mapping.mesh->vertex_count()), 0);
    for (int v : mapping.mesh->boundary_vertex_set()) on_boundary[static_cast<std::size_t>(v)] = 1;

    const QCRep rep_t = interpolate_rep(rep, t);
    BoundaryConditions bc = BoundaryConditions::blended_boundary(mapping, t);
    const bool endpoint = t == 0.0 || t == 1.0;
    if (opts.landmark_mode == LandmarkMode::every_frame || endpoint) {
        for (int v : landmarks) {
            if (on_boundary[static_cast<std::size_t>(v)]) continue;  // already constrained
            const Vec3 s = mapping.mesh->vertex(v) * (1.0 - t) + mapping.images[static_cast<std::size_t>(v)] * t;
            bc.coord[0].push_back({v, s.x});
            bc.coord[1].push_back({v, s.y});
            bc.coord[2].push_back({v, s.z});
        }
    }

    Frame frame;
    frame.t = t;
    try {
        frame.mapping = reconstruct(mapping.mesh, rep_t, bc, opts.solve, &frame.report);
    } catch (const Error& e) {
        throw Error(e.code(), "frame t = " + format_double(t) + ": " + e.what());
    }
    frame.folded = frame.mapping.folded_tets();
    return frame;
}

std::vector<Frame> generate_frames(const Mapping& mapping, const InterpolationSchedule& schedule,
                                   const InterpOptions& opts) {
    schedule.validate();
    const QCRep rep = compute_representation(mapping, opts.rep);
    std::vector<Frame> frames;
    frames.reserve(schedule.t.size());
    for (double t : schedule.t) frames.push_back(generate_frame(mapping, rep, t, opts));
    return frames;
}

}  // namespace qc3d
