// qc3d command-line front end. Everything goes through the C API in qc3d.h;
// this translation unit never touches the C++ core directly.

#include "qc3d.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

int exit_code_of(qc3d_status s) {
    switch (s) {
        case QC3D_OK: return kExitOk;
        case QC3D_ERR_NUMERIC: return kExitNumeric;
        default: return kExitInput;
    }
}

// Bails out of the current command on any failed C API call.
struct CommandError {
    int code;
};

void check(qc3d_status s, const char* context) {
    if (s == QC3D_OK) return;
    std::cerr << "qc3d: " << context << ": " << qc3d_last_error() << "\n";
    throw CommandError{exit_code_of(s)};
}

[[noreturn]] void fail_input(const std::string& message) {
    std::cerr << "qc3d: " << message << "\n";
    throw CommandError{kExitInput};
}

std::string take_string(char* s) {
    std::string out = s ? s : "";
    qc3d_string_free(s);
    return out;
}

template <typename T, void (*Free)(T*)>
using Handle = std::unique_ptr<T, std::integral_constant<void (*)(T*), Free>>;

using MeshHandle = Handle<qc3d_mesh, qc3d_mesh_free>;
using MappingHandle = Handle<qc3d_mapping, qc3d_mapping_free>;
using RepHandle = Handle<qc3d_rep, qc3d_rep_free>;
using BcHandle = Handle<qc3d_bc, qc3d_bc_free>;
using SpectrumHandle = Handle<qc3d_spectrum, qc3d_spectrum_free>;
using CompressedHandle = Handle<qc3d_compressed, qc3d_compressed_free>;

MeshHandle load_mesh(const std::string& node, const std::string& ele) {
    qc3d_mesh* m = nullptr;
    check(qc3d_mesh_load_tetgen(node.c_str(), ele.c_str(), &m), "loading mesh");
    return MeshHandle(m);
}

MappingHandle load_images(const qc3d_mesh* mesh, const std::string& path) {
    qc3d_mapping* map = nullptr;
    check(qc3d_mapping_load_node(mesh, path.c_str(), &map), "loading mapping images");
    return MappingHandle(map);
}

// --bc cube | exact:FILE.node | json:FILE
BcHandle build_bc(const qc3d_mesh* mesh, const std::string& spec) {
    qc3d_bc* bc = nullptr;
    check(qc3d_bc_create(&bc), "boundary conditions");
    BcHandle handle(bc);
    if (spec == "none") {
        // fall through to the singular-system check below
    } else if (spec == "cube") {
        check(qc3d_bc_cube_faces(bc, mesh, 1e-9), "cube boundary conditions");
    } else if (spec.rfind("exact:", 0) == 0) {
        MappingHandle target = load_images(mesh, spec.substr(6));
        check(qc3d_bc_boundary_blend(bc, target.get(), 1.0), "boundary conditions from images");
    } else if (spec.rfind("json:", 0) == 0) {
        const std::string path = spec.substr(5);
        std::ifstream in(path);
        if (!in) fail_input("cannot open '" + path + "'");
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            fail_input(path + ": " + e.what());
        }
        const char* coords[3] = {"u", "v", "w"};
        for (int a = 0; a < 3; ++a) {
            if (!j.contains(coords[a])) continue;
            for (const auto& pair : j[coords[a]])
                check(qc3d_bc_fix(bc, a, pair.at(0).get<uint64_t>(), pair.at(1).get<double>()),
                      "boundary conditions from json");
        }
    } else {
        fail_input("unknown --bc spec '" + spec + "' (expected cube, exact:FILE or json:FILE)");
    }

    // Name every coordinate whose system would be singular up front.
    std::string empty;
    const char* names[3] = {"u", "v", "w"};
    for (int a = 0; a < 3; ++a) {
        uint64_t count = 0;
        qc3d_bc_count(bc, a, &count);
        if (count == 0) empty += std::string(empty.empty() ? "" : ", ") + names[a];
    }
    if (!empty.empty())
        fail_input("boundary spec leaves the " + empty + " system(s) singular: no constrained vertex");
    return handle;
}

struct CommonOpts {
    double tol = 1e-12;
    long max_iter = -1;
    int threads = 1;
    std::string report = "text";
};

qc3d_solve_opts to_solve_opts(const CommonOpts& c) {
    qc3d_solve_opts o;
    qc3d_solve_opts_default(&o);
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    o.threads = c.threads;
    return o;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--tol", opts.tol, "CG relative residual tolerance")->capture_default_str();
    cmd->add_option("--max-iter", opts.max_iter, "CG iteration cap (-1 = 10n)")->capture_default_str();
    cmd->add_option("--threads", opts.threads, "worker threads")->capture_default_str();
    cmd->add_option("--report", opts.report, "report format")->check(CLI::IsMember({"text", "json"}));
}

void emit_report(const CommonOpts& opts, const ordered_json& j, const std::string& text) {
    if (opts.report == "json")
        std::cout << j.dump() << "\n";
    else
        std::cout << text;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) fail_input("cannot open '" + path + "' for writing");
    out << content;
}

SpectrumHandle obtain_spectrum(const qc3d_mesh* mesh, uint64_t k, const std::string& cache) {
    qc3d_spectrum* sp = nullptr;
    if (!cache.empty() && std::ifstream(cache).good()) {
        check(qc3d_spectrum_load(cache.c_str(), &sp), "loading spectrum cache");
        SpectrumHandle handle(sp);
        if (qc3d_spectrum_count(sp) >= k) return handle;
        // Cache is too small for this run; fall through and recompute.
    }
    check(qc3d_spectrum_compute(mesh, k, &sp), "computing spectrum");
    SpectrumHandle handle(sp);
    if (!cache.empty()) check(qc3d_spectrum_save(sp, cache.c_str()), "writing spectrum cache");
    return handle;
}

// --- subcommands -------------------------------------------------------------

int cmd_rep(const std::string& node, const std::string& ele, const std::string& images,
            const std::string& out, bool permissive, const CommonOpts& opts) {
    MeshHandle mesh = load_mesh(node, ele);
    MappingHandle map = load_images(mesh.get(), images);

    qc3d_rep* rep = nullptr;
    char* folded = nullptr;
    const qc3d_status s = qc3d_rep_compute(map.get(), permissive ? 1 : 0, opts.threads, &rep, &folded);
    const std::string folded_list = take_string(folded);
    if (s != QC3D_OK) {
        std::cerr << "qc3d: rep: " << qc3d_last_error() << "\n";
        return exit_code_of(s);
    }
    RepHandle rep_handle(rep);
    check(qc3d_rep_save(rep, out.c_str()), "writing QCR3");

    ordered_json j;
    j["tets"] = qc3d_rep_tet_count(rep);
    j["folded_tets"] = folded_list.empty() ? json::array() : json::parse(folded_list);
    j["output"] = out;
    emit_report(opts, j,
                "wrote " + out + " (" + std::to_string(qc3d_rep_tet_count(rep)) + " tets" +
                    (permissive && !j["folded_tets"].empty()
                         ? ", " + std::to_string(j["folded_tets"].size()) + " folded"
                         : "") +
                    ")\n");
    return kExitOk;
}

int cmd_reconstruct(const std::string& node, const std::string& ele, const std::string& rep_path,
                    const std::string& bc_spec, const std::string& out, const std::string& ground_truth,
                    const std::string& solver_log, const std::string& dump_matrices, const CommonOpts& opts) {
    MeshHandle mesh = load_mesh(node, ele);
    qc3d_rep* rep = nullptr;
    check(qc3d_rep_load(rep_path.c_str(), &rep), "loading QCR3");
    RepHandle rep_handle(rep);
    BcHandle bc = build_bc(mesh.get(), bc_spec);

    if (!dump_matrices.empty())
        check(qc3d_export_system_matrices(mesh.get(), rep, bc.get(), dump_matrices.c_str()),
              "exporting matrices");

    const qc3d_solve_opts solve = to_solve_opts(opts);
    qc3d_mapping* result = nullptr;
    char* report_raw = nullptr;
    check(qc3d_reconstruct(mesh.get(), rep, bc.get(), &solve, &result, &report_raw), "reconstruct");
    MappingHandle result_handle(result);
    ordered_json report = ordered_json::parse(take_string(report_raw));

    if (!ground_truth.empty()) {
        MappingHandle truth = load_images(mesh.get(), ground_truth);
        double err = 0;
        check(qc3d_mapping_l2_error(result, truth.get(), &err), "l2 error");
        report["error_l2"] = err;
    }
    check(qc3d_mapping_save_node(result, out.c_str()), "writing mapping");

    if (!solver_log.empty()) {
        std::string lines;
        const char* names[3] = {"u", "v", "w"};
        for (int a = 0; a < 3; ++a) {
            ordered_json line;
            line["system"] = names[a];
            line["iterations"] = report["cg_iters"][a];
            lines += line.dump() + "\n";
        }
        write_file(solver_log, lines);
    }

    std::string text = "wrote " + out + "\ncg iterations (u,v,w): " + report["cg_iters"].dump() +
                       "\nmax flux residual: " + report["max_flux_residual"].dump() + "\n";
    if (!report["error_l2"].is_null()) text += "l2 error vs ground truth: " + report["error_l2"].dump() + "\n";
    emit_report(opts, report, text);
    return kExitOk;
}

int cmd_validate(const std::string& node, const std::string& ele, const std::string& images,
                 const CommonOpts& opts) {
    MeshHandle mesh = load_mesh(node, ele);
    char* raw = nullptr;
    check(qc3d_mesh_validate_report(mesh.get(), &raw), "validate");
    ordered_json report = ordered_json::parse(take_string(raw));
    if (!images.empty()) {
        MappingHandle map = load_images(mesh.get(), images);
        char* mraw = nullptr;
        check(qc3d_mapping_check(map.get(), &mraw), "mapping check");
        report["mapping"] = json::parse(take_string(mraw));
    }
    std::string text = "vertices: " + report["vertices"].dump() + "\ntets: " + report["tets"].dump() +
                       "\nvolume total: " + report["volume_total"].dump() +
                       "\nrepaired tets: " + std::to_string(report["repaired_tets"].size()) +
                       "\nboundary vertices: " + report["boundary_vertices"].dump() + "\n";
    if (report.contains("mapping"))
        text += std::string("diffeomorphic: ") + (report["mapping"]["diffeomorphic"].get<bool>() ? "yes" : "no") +
                " (det range " + report["mapping"]["det_min"].dump() + " .. " +
                report["mapping"]["det_max"].dump() + ")\n";
    emit_report(opts, report, text);
    return kExitOk;
}

int cmd_spectrum(const std::string& node, const std::string& ele, uint64_t k, const std::string& cache,
                 const std::string& images, const std::string& table, const CommonOpts& opts) {
    MeshHandle mesh = load_mesh(node, ele);
    const uint64_t n = qc3d_mesh_vertex_count(mesh.get());
    if (k == 0 || k > n) fail_input("spectrum -k must be in [1, " + std::to_string(n) + "]");
    SpectrumHandle sp = obtain_spectrum(mesh.get(), k, cache);

    MappingHandle map;
    if (!images.empty()) map = load_images(mesh.get(), images);
    if (!table.empty()) {
        char* csv = nullptr;
        check(qc3d_spectrum_table_csv(sp.get(), map.get(), &csv), "spectrum table");
        write_file(table, take_string(csv));
    }

    double lambda1 = 0, lambdak = 0;
    qc3d_spectrum_eigenvalue(sp.get(), 0, &lambda1);
    qc3d_spectrum_eigenvalue(sp.get(), qc3d_spectrum_count(sp.get()) - 1, &lambdak);
    ordered_json j;
    j["k"] = qc3d_spectrum_count(sp.get());
    j["lambda_min"] = lambda1;
    j["lambda_max"] = lambdak;
    if (!cache.empty()) j["cache"] = cache;
    if (!table.empty()) j["table"] = table;
    emit_report(opts, j,
                "spectrum: k = " + std::to_string(j["k"].get<uint64_t>()) + ", lambda in [" +
                    j["lambda_min"].dump() + ", " + j["lambda_max"].dump() + "]\n");
    return kExitOk;
}

int cmd_compress(const std::string& node, const std::string& ele, const std::string& images,
                 uint64_t threshold, uint64_t spectrum_k, const std::string& cache, const std::string& bc_spec,
                 const std::string& out, const std::string& sweep, const std::string& sweep_csv,
                 const CommonOpts& opts) {
    MeshHandle mesh = load_mesh(node, ele);
    MappingHandle map = load_images(mesh.get(), images);
    const uint64_t n = qc3d_mesh_vertex_count(mesh.get());
    if (spectrum_k == 0) spectrum_k = n;
    if (threshold == 0 || threshold > spectrum_k)
        fail_input("compress -T must be in [1, " + std::to_string(spectrum_k) + "]");

    SpectrumHandle sp = obtain_spectrum(mesh.get(), spectrum_k, cache);
    BcHandle bc = build_bc(mesh.get(), bc_spec);

    qc3d_compressed* c = nullptr;
    check(qc3d_compress(map.get(), sp.get(), threshold, bc.get(), &c), "compress");
    CompressedHandle c_handle(c);
    check(qc3d_compressed_save(c, out.c_str()), "writing QCZ3");

    ordered_json j;
    j["threshold"] = threshold;
    j["spectrum_k"] = spectrum_k;
    j["output"] = out;
    // Stored floats: 6T spectral coefficients versus 3n raw coordinates.
    j["storage_ratio"] = static_cast<double>(6 * threshold) / static_cast<double>(3 * n);

    if (!sweep.empty()) {
        std::string csv = "T,tail_energy\n";
        std::stringstream ss(sweep);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const uint64_t T = static_cast<uint64_t>(std::stoull(item));
            if (T == 0 || T > spectrum_k) fail_input("sweep threshold " + item + " out of range");
            double tail = 0;
            check(qc3d_compressed_tail_energy(map.get(), sp.get(), T, &tail), "tail energy");
            csv += std::to_string(T) + "," + ordered_json(tail).dump() + "\n";
        }
        if (sweep_csv.empty()) fail_input("--sweep requires --sweep-csv FILE");
        write_file(sweep_csv, csv);
        j["sweep_csv"] = sweep_csv;
    }

    emit_report(opts, j, "wrote " + out + " (T = " + std::to_string(threshold) + ", storage ratio " +
                             j["storage_ratio"].dump() + ")\n");
    return kExitOk;
}

int cmd_decompress(const std::string& node, const std::string& ele, const std::string& qcz,
                   uint64_t spectrum_k, const std::string& cache, const std::string& out,
                   const std::string& ground_truth, const CommonOpts& opts) {
    MeshHandle mesh = load_mesh(node, ele);
    qc3d_compressed* c = nullptr;
    check(qc3d_compressed_load(qcz.c_str(), &c), "loading QCZ3");
    CompressedHandle c_handle(c);

    if (spectrum_k == 0) spectrum_k = qc3d_compressed_threshold(c);
    SpectrumHandle sp = obtain_spectrum(mesh.get(), spectrum_k, cache);

    const qc3d_solve_opts solve = to_solve_opts(opts);
    qc3d_mapping* result = nullptr;
    char* report_raw = nullptr;
    check(qc3d_decompress(c, mesh.get(), sp.get(), &solve, &result, &report_raw), "decompress");
    MappingHandle result_handle(result);
    ordered_json report = ordered_json::parse(take_string(report_raw));
    check(qc3d_mapping_save_node(result, out.c_str()), "writing mapping");

    if (!ground_truth.empty()) {
        MappingHandle truth = load_images(mesh.get(), ground_truth);
        double err = 0;
        check(qc3d_mapping_l2_error(result, truth.get(), &err), "l2 error");
        report["error_l2"] = err;
        double mse = 0;
        for (uint64_t i = 0; i < qc3d_mesh_vertex_count(mesh.get()); ++i) {
            double a[3], b[3];
            qc3d_mapping_image(result, i, a);
            qc3d_mapping_image(truth.get(), i, b);
            const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
            mse += dx * dx + dy * dy + dz * dz;
        }
        // Mean squared per-vertex Euclidean displacement.
        report["mse"] = mse / static_cast<double>(qc3d_mesh_vertex_count(mesh.get()));
    }

    emit_report(opts, report, "wrote " + out + "\nclamped tets: " + report["clamped_tets"].dump() + "\n");
    return kExitOk;
}

int cmd_interp(const std::string& node, const std::string& ele, const std::string& images, int frames,
               const std::string& out_dir, const std::string& landmarks, const std::string& landmark_mode,
               const std::string& surface, const std::string& emit_points, double sigma, double kappa,
               uint64_t seed, const CommonOpts& opts) {
    // Seeding utility mode: surface -> filtered volumetric points for tetgen.
    if (!surface.empty() || !emit_points.empty()) {
        if (surface.empty() || emit_points.empty())
            fail_input("seeding mode needs both --surface and --emit-points");
        char* raw = nullptr;
        check(qc3d_seed_points(surface.c_str(), emit_points.c_str(), sigma, kappa, seed, &raw),
              "seeding points");
        ordered_json j = ordered_json::parse(take_string(raw));
        emit_report(opts, j,
                    "wrote " + emit_points + " (" + j["written"].dump() + " points: " +
                        j["surface_points"].dump() + " surface + " + j["kept"].dump() + " volume)\n");
        return kExitOk;
    }

    if (node.empty() || ele.empty() || images.empty() || out_dir.empty())
        fail_input("interp needs <node> <ele> <images> and -o OUTDIR (or --surface/--emit-points)");
    MeshHandle mesh = load_mesh(node, ele);
    MappingHandle map = load_images(mesh.get(), images);

    const qc3d_solve_opts solve = to_solve_opts(opts);
    char* manifest_raw = nullptr;
    const qc3d_status s =
        qc3d_interp_frames(map.get(), frames, landmarks.empty() ? nullptr : landmarks.c_str(),
                           landmark_mode == "all" ? 1 : 0, &solve, seed, out_dir.c_str(), &manifest_raw);
    const std::string manifest = take_string(manifest_raw);
    if (s != QC3D_OK) {
        std::cerr << "qc3d: interp: " << qc3d_last_error() << "\n";
        std::cerr << "completed frames and manifest.json are in " << out_dir << "\n";
        return exit_code_of(s);
    }
    ordered_json j = ordered_json::parse(manifest);
    std::string text = "wrote " + std::to_string(j["files"].size()) + " frames to " + out_dir + "\n";
    for (const auto& chk : j["fold_checks"])
        if (!chk["fold_free"].get<bool>())
            text += "warning: frame " + chk["frame"].dump() + " has " + chk["folded_tets"].dump() +
                    " folded tets\n";
    emit_report(opts, j, text);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qc3d: volumetric quasiconformal representation, reconstruction, compression and interpolation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read defaults from a config file");

    std::string node, ele, images, rep_path, out, bc_spec, bc_spec_compress = "cube", ground_truth, cache, table,
        qcz, landmarks;
    std::string landmark_mode = "endpoints", surface, emit_points, sweep, sweep_csv, solver_log, dump_matrices;
    bool permissive = false;
    uint64_t k = 0, threshold = 0, spectrum_k = 0, seed = 0;
    int frames = 2;
    double sigma = 0.05, kappa = 0.0;
    CommonOpts common;

    auto* rep = app.add_subcommand("rep", "compute the per-tet representation of a mapping (QCR3)");
    rep->add_option("node", node, "source .node file")->required();
    rep->add_option("ele", ele, "source .ele file")->required();
    rep->add_option("images", images, "image positions .node file")->required();
    rep->add_option("-o,--output", out, "output .qcr3 path")->required();
    rep->add_flag("--permissive", permissive, "tolerate orientation-reversed tets");
    add_common(rep, common);

    auto* rec = app.add_subcommand("reconstruct", "rebuild a mapping from its representation (QCR3)");
    rec->add_option("node", node)->required();
    rec->add_option("ele", ele)->required();
    rec->add_option("rep", rep_path, "input .qcr3 path")->required();
    rec->add_option("--bc", bc_spec, "boundary spec: cube | exact:FILE.node | json:FILE");
    rec->add_option("-o,--output", out, "output .node path")->required();
    rec->add_option("--ground-truth", ground_truth, "reference images for the error report");
    rec->add_option("--solver-log", solver_log, "write per-system JSON lines");
    rec->add_option("--dump-matrices", dump_matrices, "MatrixMarket export prefix (C and masked systems)");
    add_common(rec, common);

    auto* val = app.add_subcommand("validate", "validate mesh files and (optionally) a mapping");
    val->add_option("node", node)->required();
    val->add_option("ele", ele)->required();
    val->add_option("--images", images, "mapping images to check for folds");
    add_common(val, common);

    auto* spec = app.add_subcommand("spectrum", "Laplace-Beltrami spectrum tables and cache");
    spec->add_option("node", node)->required();
    spec->add_option("ele", ele)->required();
    spec->add_option("-k", k, "number of eigenpairs")->required();
    spec->add_option("--cache", cache, "QSP3 cache path (reused when compatible)");
    spec->add_option("--mapping", images, "images whose representation to project");
    spec->add_option("--table", table, "write (lambda, xi) CSV here");
    add_common(spec, common);

    auto* comp = app.add_subcommand("compress", "compress a mapping into spectral coefficients (QCZ3)");
    comp->add_option("node", node)->required();
    comp->add_option("ele", ele)->required();
    comp->add_option("images", images)->required();
    comp->add_option("-T,--threshold", threshold, "coefficients kept per component")->required();
    comp->add_option("-k,--spectrum-k", spectrum_k, "eigenpairs to compute (default: all)");
    comp->add_option("--cache", cache, "QSP3 cache path");
    comp->add_option("--bc", bc_spec_compress, "boundary record: cube | exact:FILE | json:FILE")
        ->capture_default_str();
    comp->add_option("-o,--output", out)->required();
    comp->add_option("--sweep", sweep, "comma-separated T values for a truncation-error sweep");
    comp->add_option("--sweep-csv", sweep_csv, "CSV output for --sweep");
    add_common(comp, common);

    auto* dec = app.add_subcommand("decompress", "rebuild a mapping from a QCZ3 container");
    dec->add_option("node", node)->required();
    dec->add_option("ele", ele)->required();
    dec->add_option("qcz", qcz, "input .qcz3 path")->required();
    dec->add_option("-k,--spectrum-k", spectrum_k, "eigenpairs to compute (default: T)");
    dec->add_option("--cache", cache, "QSP3 cache path");
    dec->add_option("-o,--output", out)->required();
    dec->add_option("--ground-truth", ground_truth, "reference images for the error report");
    add_common(dec, common);

    auto* interp = app.add_subcommand("interp", "keyframe interpolation (or Poisson-disk seeding)");
    interp->add_option("node", node);
    interp->add_option("ele", ele);
    interp->add_option("images", images);
    interp->add_option("--frames", frames, "number of frames including both endpoints")->capture_default_str();
    interp->add_option("-o,--output", out, "output directory for frame_###.node + manifest.json");
    interp->add_option("--landmarks", landmarks, "vertex-index file of surface landmarks (0-based)");
    interp->add_option("--landmark-mode", landmark_mode, "endpoints | all")
        ->check(CLI::IsMember({"endpoints", "all"}));
    interp->add_option("--surface", surface, "seeding mode: keyframe surface .node");
    interp->add_option("--emit-points", emit_points, "seeding mode: output .node for tetgen");
    interp->add_option("--sigma", sigma, "Poisson-disk radius")->capture_default_str();
    interp->add_option("--kappa", kappa, "far-field sparsity weight")->capture_default_str();
    interp->add_option("--seed", seed, "RNG seed")->capture_default_str();
    add_common(interp, common);

    CLI11_PARSE(app, argc, argv);

    try {
        if (rep->parsed()) return cmd_rep(node, ele, images, out, permissive, common);
        if (rec->parsed())
            return cmd_reconstruct(node, ele, rep_path, bc_spec.empty() ? "none" : bc_spec, out, ground_truth,
                                   solver_log, dump_matrices, common);
        if (val->parsed()) return cmd_validate(node, ele, images, common);
        if (spec->parsed()) return cmd_spectrum(node, ele, k, cache, images, table, common);
        if (comp->parsed())
            return cmd_compress(node, ele, images, threshold, spectrum_k, cache, bc_spec_compress, out, sweep,
                                sweep_csv, common);
        if (dec->parsed())
            return cmd_decompress(node, ele, qcz, spectrum_k, cache, out, ground_truth, common);
        if (interp->parsed())
            return cmd_interp(node, ele, images, frames, out, landmarks, landmark_mode, surface, emit_points,
                              sigma, kappa, seed, common);
    } catch (const CommandError& e) {
        return e.code;
    }
    return kExitInput;
}
