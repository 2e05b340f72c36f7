#include "qc3d.h"

#include "qc3d/interp.hpp"
#include "qc3d/lbs3d.hpp"
#include "qc3d/mesh.hpp"
#include "qc3d/qcrep.hpp"
#include "qc3d/spectral.hpp"
#include "qc3d/util.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

using nlohmann::ordered_json;

struct qc3d_mesh {
    std::shared_ptr<const qc3d::TetMesh> mesh;
    std::vector<int> repaired;
};
struct qc3d_mapping {
    qc3d::Mapping map;
};
struct qc3d_rep {
    qc3d::QCRep rep;
};
struct qc3d_bc {
    qc3d::BoundaryConditions bc;
};
struct qc3d_spectrum {
    qc3d::Spectrum sp;
};
struct qc3d_compressed {
    qc3d::CompressedMapping c;
};

namespace {

thread_local std::string g_last_error;

qc3d_status status_of(const qc3d::Error& e) {
    switch (e.code()) {
        case qc3d::ErrorCode::invalid_argument: return QC3D_ERR_INVALID;
        case qc3d::ErrorCode::parse: return QC3D_ERR_PARSE;
        case qc3d::ErrorCode::io: return QC3D_ERR_IO;
        case qc3d::ErrorCode::numerical: return QC3D_ERR_NUMERIC;
    }
    return QC3D_ERR_INVALID;
}

template <typename Fn>
qc3d_status guarded(Fn&& fn) {
    try {
        fn();
        return QC3D_OK;
    } catch (const qc3d::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QC3D_ERR_INVALID;
    }
}

qc3d_status require(bool ok, const char* message) {
    if (!ok) {
        g_last_error = message;
        return QC3D_ERR_INVALID;
    }
    return QC3D_OK;
}

char* dup_string(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

qc3d::CgOptions to_cg_options(const qc3d_solve_opts* opts) {
    qc3d::CgOptions cg;
    if (opts) {
        cg.tol = opts->tol;
        cg.max_iter = opts->max_iter;
        cg.threads = opts->threads;
    }
    return cg;
}

std::string reconstruct_report_json(const qc3d::ReconstructReport& r) {
    ordered_json j;
    j["error_l2"] = nullptr;
    j["cg_iters"] = {r.cg_iterations[0], r.cg_iterations[1], r.cg_iterations[2]};
    j["max_flux_residual"] = r.max_flux_residual;
    return j.dump();
}

}  // namespace

extern "C" {

const char* qc3d_last_error(void) { return g_last_error.c_str(); }

void qc3d_string_free(char* s) { delete[] s; }

void qc3d_solve_opts_default(qc3d_solve_opts* opts) {
    if (!opts) return;
    opts->tol = 1e-12;
    opts->max_iter = -1;
    opts->threads = 1;
}

/* --- meshes ---------------------------------------------------------------- */

qc3d_status qc3d_mesh_load_tetgen(const char* node_path, const char* ele_path, qc3d_mesh** out) {
    if (auto s = require(node_path && ele_path && out, "null argument")) return s;
    return guarded([&] {
        auto handle = std::make_unique<qc3d_mesh>();
        handle->mesh = std::make_shared<qc3d::TetMesh>(qc3d::load_tetgen(node_path, ele_path, &handle->repaired));
        *out = handle.release();
    });
}

qc3d_status qc3d_mesh_load_json(const char* path, qc3d_mesh** out) {
    if (auto s = require(path && out, "null argument")) return s;
    return guarded([&] {
        auto handle = std::make_unique<qc3d_mesh>();
        handle->mesh = std::make_shared<qc3d::TetMesh>(qc3d::load_mesh_json(path));
        *out = handle.release();
    });
}

qc3d_status qc3d_mesh_save_json(const qc3d_mesh* mesh, const qc3d_mapping* images, const char* path) {
    if (auto s = require(mesh && path, "null argument")) return s;
    return guarded([&] {
        qc3d::save_mesh_json(path, *mesh->mesh, images ? &images->map.images : nullptr);
    });
}

qc3d_status qc3d_mesh_save_tetgen(const qc3d_mesh* mesh, const char* node_path, const char* ele_path) {
    if (auto s = require(mesh && node_path && ele_path, "null argument")) return s;
    return guarded([&] {
        qc3d::save_node(node_path, mesh->mesh->vertices());
        qc3d::save_ele(ele_path, mesh->mesh->tets());
    });
}

uint64_t qc3d_mesh_vertex_count(const qc3d_mesh* mesh) {
    return mesh ? static_cast<uint64_t>(mesh->mesh->vertex_count()) : 0;
}

uint64_t qc3d_mesh_tet_count(const qc3d_mesh* mesh) {
    return mesh ? static_cast<uint64_t>(mesh->mesh->tet_count()) : 0;
}

uint64_t qc3d_mesh_content_hash(const qc3d_mesh* mesh) { return mesh ? mesh->mesh->content_hash() : 0; }

qc3d_status qc3d_mesh_vertex(const qc3d_mesh* mesh, uint64_t index, double xyz[3]) {
    if (auto s = require(mesh && xyz, "null argument")) return s;
    if (auto s = require(index < static_cast<uint64_t>(mesh->mesh->vertex_count()), "vertex index out of range"))
        return s;
    const qc3d::Vec3& p = mesh->mesh->vertex(static_cast<int>(index));
    xyz[0] = p.x;
    xyz[1] = p.y;
    xyz[2] = p.z;
    return QC3D_OK;
}

qc3d_status qc3d_mesh_validate_report(const qc3d_mesh* mesh, char** report_json) {
    if (auto s = require(mesh && report_json, "null argument")) return s;
    return guarded([&] {
        const qc3d::TetMesh& m = *mesh->mesh;
        double vmin = m.volume(0), vmax = m.volume(0);
        for (int t = 1; t < m.tet_count(); ++t) {
            vmin = std::min(vmin, m.volume(t));
            vmax = std::max(vmax, m.volume(t));
        }
        ordered_json j;
        j["vertices"] = m.vertex_count();
        j["tets"] = m.tet_count();
        j["volume_total"] = m.total_volume();
        j["volume_min"] = vmin;
        j["volume_max"] = vmax;
        j["repaired_tets"] = mesh->repaired;
        j["boundary_vertices"] = m.boundary_vertex_set().size();
        *report_json = dup_string(j.dump());
    });
}

void qc3d_mesh_free(qc3d_mesh* mesh) { delete mesh; }

/* --- mappings --------------------------------------------------------------- */

qc3d_status qc3d_mapping_load_node(const qc3d_mesh* mesh, const char* node_path, qc3d_mapping** out) {
    if (auto s = require(mesh && node_path && out, "null argument")) return s;
    return guarded([&] { *out = new qc3d_mapping{qc3d::load_mapping(mesh->mesh, node_path)}; });
}

qc3d_status qc3d_mapping_identity(const qc3d_mesh* mesh, qc3d_mapping** out) {
    if (auto s = require(mesh && out, "null argument")) return s;
    return guarded([&] { *out = new qc3d_mapping{qc3d::Mapping::identity(mesh->mesh)}; });
}

qc3d_status qc3d_mapping_save_node(const qc3d_mapping* mapping, const char* path) {
    if (auto s = require(mapping && path, "null argument")) return s;
    return guarded([&] { qc3d::save_node(path, mapping->map.images); });
}

qc3d_status qc3d_mapping_image(const qc3d_mapping* mapping, uint64_t index, double xyz[3]) {
    if (auto s = require(mapping && xyz, "null argument")) return s;
    if (auto s = require(index < mapping->map.images.size(), "vertex index out of range")) return s;
    const qc3d::Vec3& p = mapping->map.images[index];
    xyz[0] = p.x;
    xyz[1] = p.y;
    xyz[2] = p.z;
    return QC3D_OK;
}

qc3d_status qc3d_mapping_check(const qc3d_mapping* mapping, char** report_json) {
    if (auto s = require(mapping && report_json, "null argument")) return s;
    return guarded([&] {
        const qc3d::Mapping& map = mapping->map;
        double dmin = 0, dmax = 0;
        for (int t = 0; t < map.mesh->tet_count(); ++t) {
            const double d = map.jacobian(t).det();
            if (t == 0) dmin = dmax = d;
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
        const std::vector<int> folded = map.folded_tets();
        ordered_json j;
        j["diffeomorphic"] = folded.empty();
        j["folded_tets"] = folded;
        j["det_min"] = dmin;
        j["det_max"] = dmax;
        *report_json = dup_string(j.dump());
    });
}

qc3d_status qc3d_mapping_l2_error(const qc3d_mapping* a, const qc3d_mapping* b, double* out) {
    if (auto s = require(a && b && out, "null argument")) return s;
    return guarded([&] { *out = qc3d::mapping_l2_error(a->map, b->map); });
}

void qc3d_mapping_free(qc3d_mapping* mapping) { delete mapping; }

/* --- representation ----------------------------------------------------------- */

qc3d_status qc3d_rep_compute(const qc3d_mapping* mapping, int permissive, int threads, qc3d_rep** out,
                             char** folded_json) {
    if (auto s = require(mapping && out, "null argument")) return s;
    return guarded([&] {
        qc3d::RepOptions opts;
        opts.permissive = permissive != 0;
        opts.threads = threads > 0 ? threads : 1;
        std::vector<int> folded;
        auto rep = qc3d::compute_representation(mapping->map, opts, &folded);
        if (folded_json) *folded_json = dup_string(ordered_json(folded).dump());
        *out = new qc3d_rep{std::move(rep)};
    });
}

uint64_t qc3d_rep_tet_count(const qc3d_rep* rep) {
    return rep ? static_cast<uint64_t>(rep->rep.tet_count()) : 0;
}

qc3d_status qc3d_rep_get(const qc3d_rep* rep, uint64_t tet, double q[6]) {
    if (auto s = require(rep && q, "null argument")) return s;
    if (auto s = require(tet < rep->rep.q.size(), "tet index out of range")) return s;
    for (int i = 0; i < 6; ++i) q[i] = rep->rep.q[tet][static_cast<std::size_t>(i)];
    return QC3D_OK;
}

qc3d_status qc3d_rep_identity(uint64_t tet_count, qc3d_rep** out) {
    if (auto s = require(out != nullptr, "null argument")) return s;
    return guarded([&] { *out = new qc3d_rep{qc3d::QCRep::identity(static_cast<int>(tet_count))}; });
}

qc3d_status qc3d_rep_interpolate(const qc3d_rep* rep, double t, qc3d_rep** out) {
    if (auto s = require(rep && out, "null argument")) return s;
    return guarded([&] { *out = new qc3d_rep{qc3d::interpolate_rep(rep->rep, t)}; });
}

qc3d_status qc3d_rep_save(const qc3d_rep* rep, const char* path) {
    if (auto s = require(rep && path, "null argument")) return s;
    return guarded([&] { qc3d::save_qcr3(path, rep->rep); });
}

qc3d_status qc3d_rep_load(const char* path, qc3d_rep** out) {
    if (auto s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new qc3d_rep{qc3d::load_qcr3(path)}; });
}

void qc3d_rep_free(qc3d_rep* rep) { delete rep; }

/* --- boundary conditions --------------------------------------------------------- */

qc3d_status qc3d_bc_create(qc3d_bc** out) {
    if (auto s = require(out != nullptr, "null argument")) return s;
    *out = new qc3d_bc{};
    return QC3D_OK;
}

qc3d_status qc3d_bc_fix(qc3d_bc* bc, int coord, uint64_t vertex, double value) {
    if (auto s = require(bc != nullptr, "null argument")) return s;
    if (auto s = require(coord >= 0 && coord <= 2, "coord must be 0, 1 or 2")) return s;
    bc->bc.coord[static_cast<std::size_t>(coord)].push_back({static_cast<int>(vertex), value});
    return QC3D_OK;
}

qc3d_status qc3d_bc_cube_faces(qc3d_bc* bc, const qc3d_mesh* mesh, double tol) {
    if (auto s = require(bc && mesh, "null argument")) return s;
    return guarded([&] {
        qc3d::BoundaryConditions cube = qc3d::BoundaryConditions::cube_faces(*mesh->mesh, tol > 0 ? tol : 1e-9);
        for (int a = 0; a < 3; ++a)
            for (const auto& c : cube.coord[static_cast<std::size_t>(a)])
                bc->bc.coord[static_cast<std::size_t>(a)].push_back(c);
    });
}

qc3d_status qc3d_bc_boundary_blend(qc3d_bc* bc, const qc3d_mapping* mapping, double t) {
    if (auto s = require(bc && mapping, "null argument")) return s;
    return guarded([&] {
        qc3d::BoundaryConditions blend = qc3d::BoundaryConditions::blended_boundary(mapping->map, t);
        for (int a = 0; a < 3; ++a)
            for (const auto& c : blend.coord[static_cast<std::size_t>(a)])
                bc->bc.coord[static_cast<std::size_t>(a)].push_back(c);
    });
}

qc3d_status qc3d_bc_count(const qc3d_bc* bc, int coord, uint64_t* out) {
    if (auto s = require(bc && out, "null argument")) return s;
    if (auto s = require(coord >= 0 && coord <= 2, "coord must be 0, 1 or 2")) return s;
    *out = bc->bc.coord[static_cast<std::size_t>(coord)].size();
    return QC3D_OK;
}

void qc3d_bc_free(qc3d_bc* bc) { delete bc; }

/* --- reconstruction ----------------------------------------------------------------- */

qc3d_status qc3d_reconstruct(const qc3d_mesh* mesh, const qc3d_rep* rep, const qc3d_bc* bc,
                             const qc3d_solve_opts* opts, qc3d_mapping** out, char** report_json) {
    if (auto s = require(mesh && rep && bc && out, "null argument")) return s;
    return guarded([&] {
        qc3d::ReconstructReport report;
        auto map = qc3d::reconstruct(mesh->mesh, rep->rep, bc->bc, to_cg_options(opts), &report);
        if (report_json) *report_json = dup_string(reconstruct_report_json(report));
        *out = new qc3d_mapping{std::move(map)};
    });
}

qc3d_status qc3d_export_system_matrices(const qc3d_mesh* mesh, const qc3d_rep* rep, const qc3d_bc* bc,
                                        const char* path_prefix) {
    if (auto s = require(mesh && rep && bc && path_prefix, "null argument")) return s;
    return guarded([&] {
        const qc3d::GeneralizedLaplacian L = qc3d::assemble(*mesh->mesh, rep->rep);
        const std::string prefix = path_prefix;
        L.C.save_matrix_market(prefix + "_C.mtx");
        const qc3d::MaskedSystems sys = qc3d::apply_boundary(L, bc->bc);
        sys.u.M.save_matrix_market(prefix + "_u.mtx");
        sys.v.M.save_matrix_market(prefix + "_v.mtx");
        sys.w.M.save_matrix_market(prefix + "_w.mtx");
    });
}

/* --- spectral ------------------------------------------------------------------------- */

qc3d_status qc3d_spectrum_compute(const qc3d_mesh* mesh, uint64_t k, qc3d_spectrum** out) {
    if (auto s = require(mesh && out, "null argument")) return s;
    return guarded([&] {
        const qc3d::LaplaceBeltrami lb = qc3d::build_laplace_beltrami(*mesh->mesh);
        *out = new qc3d_spectrum{qc3d::eigensolve(lb, static_cast<int>(k))};
    });
}

uint64_t qc3d_spectrum_count(const qc3d_spectrum* sp) { return sp ? static_cast<uint64_t>(sp->sp.k) : 0; }

qc3d_status qc3d_spectrum_eigenvalue(const qc3d_spectrum* sp, uint64_t i, double* out) {
    if (auto s = require(sp && out, "null argument")) return s;
    if (auto s = require(i < sp->sp.eigenvalues.size(), "eigenvalue index out of range")) return s;
    *out = sp->sp.eigenvalues[i];
    return QC3D_OK;
}

qc3d_status qc3d_spectrum_save(const qc3d_spectrum* sp, const char* path) {
    if (auto s = require(sp && path, "null argument")) return s;
    return guarded([&] { qc3d::save_qsp3(path, sp->sp); });
}

qc3d_status qc3d_spectrum_load(const char* path, qc3d_spectrum** out) {
    if (auto s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new qc3d_spectrum{qc3d::load_qsp3(path)}; });
}

qc3d_status qc3d_spectrum_table_csv(const qc3d_spectrum* sp, const qc3d_mapping* mapping, char** csv) {
    if (auto s = require(sp && csv, "null argument")) return s;
    return guarded([&] {
        const qc3d::Spectrum& spectrum = sp->sp;
        std::array<std::vector<double>, 6> xi;
        if (mapping) {
            const qc3d::TetMesh& mesh = *mapping->map.mesh;
            if (mesh.content_hash() != spectrum.mesh_hash)
                throw qc3d::Error(qc3d::ErrorCode::invalid_argument,
                                  "spectrum was built for a different mesh");
            const qc3d::QCRep rep = qc3d::compute_representation(mapping->map);
            std::vector<double> per_tet(static_cast<std::size_t>(mesh.tet_count()));
            for (int comp = 0; comp < 6; ++comp) {
                for (int t = 0; t < mesh.tet_count(); ++t)
                    per_tet[static_cast<std::size_t>(t)] = rep.q[static_cast<std::size_t>(t)][static_cast<std::size_t>(comp)];
                xi[static_cast<std::size_t>(comp)] = qc3d::project(spectrum, qc3d::tet_to_vertex(mesh, per_tet));
            }
        }
        std::ostringstream out;
        out << "index,lambda";
        if (mapping)
            for (int c = 1; c <= 6; ++c) out << ",xi_" << c;
        out << '\n';
        for (int i = 0; i < spectrum.k; ++i) {
            out << (i + 1) << ',' << qc3d::format_double(spectrum.eigenvalues[static_cast<std::size_t>(i)]);
            if (mapping)
                for (int c = 0; c < 6; ++c)
                    out << ',' << qc3d::format_double(xi[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)]);
            out << '\n';
        }
        *csv = dup_string(out.str());
    });
}

void qc3d_spectrum_free(qc3d_spectrum* sp) { delete sp; }

qc3d_status qc3d_compress(const qc3d_mapping* mapping, const qc3d_spectrum* sp, uint64_t threshold,
                          const qc3d_bc* bc, qc3d_compressed** out) {
    if (auto s = require(mapping && sp && bc && out, "null argument")) return s;
    return guarded([&] {
        *out = new qc3d_compressed{qc3d::compress(mapping->map, sp->sp, threshold, bc->bc)};
    });
}

qc3d_status qc3d_compressed_save(const qc3d_compressed* c, const char* path) {
    if (auto s = require(c && path, "null argument")) return s;
    return guarded([&] { qc3d::save_qcz3(path, c->c); });
}

qc3d_status qc3d_compressed_load(const char* path, qc3d_compressed** out) {
    if (auto s = require(path && out, "null argument")) return s;
    return guarded([&] { *out = new qc3d_compressed{qc3d::load_qcz3(path)}; });
}

uint64_t qc3d_compressed_threshold(const qc3d_compressed* c) { return c ? c->c.threshold : 0; }

qc3d_status qc3d_compressed_tail_energy(const qc3d_mapping* mapping, const qc3d_spectrum* sp,
                                        uint64_t threshold, double* out) {
    if (auto s = require(mapping && sp && out, "null argument")) return s;
    return guarded([&] {
        const qc3d::TetMesh& mesh = *mapping->map.mesh;
        if (mesh.content_hash() != sp->sp.mesh_hash)
            throw qc3d::Error(qc3d::ErrorCode::invalid_argument, "spectrum was built for a different mesh");
        if (threshold < 1 || threshold > static_cast<uint64_t>(sp->sp.k))
            throw qc3d::Error(qc3d::ErrorCode::invalid_argument, "threshold T must be in [1, k]");
        const qc3d::QCRep rep = qc3d::compute_representation(mapping->map);
        std::vector<double> per_tet(static_cast<std::size_t>(mesh.tet_count()));
        double tail = 0.0;
        for (int comp = 0; comp < 6; ++comp) {
            for (int t = 0; t < mesh.tet_count(); ++t)
                per_tet[static_cast<std::size_t>(t)] = rep.q[static_cast<std::size_t>(t)][static_cast<std::size_t>(comp)];
            const std::vector<double> xi = qc3d::project(sp->sp, qc3d::tet_to_vertex(mesh, per_tet));
            for (std::size_t i = threshold; i < xi.size(); ++i) tail += xi[i] * xi[i];
        }
        *out = tail;
    });
}

qc3d_status qc3d_decompress(const qc3d_compressed* c, const qc3d_mesh* mesh, const qc3d_spectrum* sp,
                            const qc3d_solve_opts* opts, qc3d_mapping** out, char** report_json) {
    if (auto s = require(c && mesh && sp && out, "null argument")) return s;
    return guarded([&] {
        qc3d::DecompressReport report;
        auto map = qc3d::decompress(c->c, mesh->mesh, sp->sp, to_cg_options(opts), &report);
        if (report_json) {
            ordered_json j;
            j["clamped_tets"] = report.clamped_tets;
            j["cg_iters"] = {report.recon.cg_iterations[0], report.recon.cg_iterations[1],
                             report.recon.cg_iterations[2]};
            j["max_flux_residual"] = report.recon.max_flux_residual;
            *report_json = dup_string(j.dump());
        }
        *out = new qc3d_mapping{std::move(map)};
    });
}

void qc3d_compressed_free(qc3d_compressed* c) { delete c; }

/* --- interpolation ------------------------------------------------------------------------ */

namespace {

std::vector<int> load_landmarks(const char* path) {
    std::vector<int> landmarks;
    if (!path) return landmarks;
    std::ifstream in(path);
    if (!in) throw qc3d::Error(qc3d::ErrorCode::io, std::string("cannot open '") + path + "'");
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) {
            int v = 0;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
                throw qc3d::Error(qc3d::ErrorCode::parse, std::string(path) + ":" + std::to_string(line_no) +
                                                              ": expected vertex index, got '" + tok + "'");
            landmarks.push_back(v);
        }
    }
    return landmarks;
}

}  // namespace

qc3d_status qc3d_interp_frames(const qc3d_mapping* mapping, int frames, const char* landmarks_path,
                               int landmark_mode, const qc3d_solve_opts* opts, uint64_t seed,
                               const char* out_dir, char** manifest_json) {
    if (auto s = require(mapping && out_dir, "null argument")) return s;
    if (auto s = require(frames >= 2, "frames must be >= 2")) return s;

    ordered_json manifest;
    const auto schedule = [&]() -> qc3d::InterpolationSchedule {
        return qc3d::InterpolationSchedule::uniform(frames);
    }();

    qc3d_status final_status = QC3D_OK;
    try {
        std::filesystem::create_directories(out_dir);

        qc3d::InterpOptions iopts;
        iopts.landmarks = load_landmarks(landmarks_path);
        iopts.landmark_mode = landmark_mode == 1 ? qc3d::LandmarkMode::every_frame
                                                 : qc3d::LandmarkMode::endpoints_only;
        iopts.solve = to_cg_options(opts);

        manifest["frames"] = frames;
        manifest["schedule"] = schedule.t;
        manifest["landmarks"] = iopts.landmarks.size();
        manifest["landmark_mode"] = landmark_mode == 1 ? "every_frame" : "endpoints_only";
        manifest["seeds"] = {{"run", seed}};
        manifest["files"] = ordered_json::array();
        manifest["fold_checks"] = ordered_json::array();
        manifest["status"] = "complete";

        const qc3d::QCRep rep = qc3d::compute_representation(mapping->map, iopts.rep);
        for (int i = 0; i < frames; ++i) {
            const double t = schedule.t[static_cast<std::size_t>(i)];
            try {
                const qc3d::Frame frame = qc3d::generate_frame(mapping->map, rep, t, iopts);
                char name[32];
                std::snprintf(name, sizeof name, "frame_%03d.node", i);
                const std::string path = std::string(out_dir) + "/" + name;
                qc3d::save_node(path, frame.mapping.images);
                manifest["files"].push_back(name);
                ordered_json check;
                check["frame"] = i;
                check["t"] = t;
                check["folded_tets"] = frame.folded.size();
                check["fold_free"] = frame.folded.empty();
                check["cg_iters"] = {frame.report.cg_iterations[0], frame.report.cg_iterations[1],
                                     frame.report.cg_iterations[2]};
                manifest["fold_checks"].push_back(check);
            } catch (const qc3d::Error& e) {
                manifest["status"] = "failed";
                manifest["failed_frame"] = i;
                manifest["error"] = e.what();
                g_last_error = e.what();
                final_status = status_of(e);
                break;
            }
        }

        std::ofstream mf(std::string(out_dir) + "/manifest.json");
        if (!mf) throw qc3d::Error(qc3d::ErrorCode::io, "cannot write manifest.json");
        mf << manifest.dump(2) << '\n';
        if (manifest_json) *manifest_json = dup_string(manifest.dump());
    } catch (const qc3d::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return QC3D_ERR_INVALID;
    }
    return final_status;
}

/* --- seeding utility ------------------------------------------------------------------------- */

qc3d_status qc3d_seed_points(const char* surface_node, const char* out_node, double sigma, double kappa,
                             uint64_t seed, char** report_json) {
    if (auto s = require(surface_node && out_node, "null argument")) return s;
    return guarded([&] {
        std::vector<qc3d::Vec3> surface = qc3d::load_node_points(surface_node);
        const qc3d::UnitCubeTransform tr = qc3d::normalize_to_unit_cube(surface, 0.1);

        qc3d::SeedingConfig cfg;
        cfg.sigma = sigma;
        cfg.kappa = kappa;
        cfg.seed = seed;

        const qc3d::PointIndex index(surface);
        const std::vector<qc3d::Vec3> candidates =
            qc3d::poisson_disk_sample({0, 0, 0}, {1, 1, 1}, sigma, seed);
        const std::vector<qc3d::Vec3> kept = qc3d::filter_samples(candidates, index, cfg);

        std::vector<qc3d::Vec3> all = surface;
        all.insert(all.end(), kept.begin(), kept.end());
        qc3d::save_node(out_node, all);

        if (report_json) {
            ordered_json j;
            j["surface_points"] = surface.size();
            j["candidates"] = candidates.size();
            j["kept"] = kept.size();
            j["written"] = all.size();
            j["sigma"] = sigma;
            j["kappa"] = kappa;
            j["seed"] = seed;
            j["normalize_scale"] = tr.scale;
            j["normalize_offset"] = {tr.offset.x, tr.offset.y, tr.offset.z};
            *report_json = dup_string(j.dump());
        }
    });
}

} /* extern "C" */
