// Command-line driver for the volumetric contouring toolkit.
//
// Exit codes: 0 success, 1 runtime/io failure, 2 bad arguments, 3 phase
// collapse during level-set evolution, 4 contour extraction/reconstruction
// failure. Every error is a single stderr line `ERROR <code>: <detail>`.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "voxseg/voxseg.hpp"

namespace {

std::vector<double> parse_tuple(const std::string& text, std::size_t n, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            voxseg::fail("args", std::string(what) + ": cannot parse \"" + item + "\"");
        }
    }
    if (out.size() != n)
        voxseg::fail("args", std::string(what) + ": expected " + std::to_string(n) +
                                 " comma-separated values, got \"" + text + "\"");
    return out;
}

voxseg::Dims parse_dims(const std::string& text) {
    const auto v = parse_tuple(text, 3, "--dims");
    return voxseg::Dims{static_cast<int>(v[0]), static_cast<int>(v[1]),
                        static_cast<int>(v[2])};
}

voxseg::SeedPoint parse_seed(const std::string& text) {
    const auto v = parse_tuple(text, 3, "--seed");
    return voxseg::SeedPoint{static_cast<int>(v[0]), static_cast<int>(v[1]),
                             static_cast<int>(v[2])};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) voxseg::fail("io", "cannot open " + path + " for writing");
    out << text;
    if (!out) voxseg::fail("io", "write failed for " + path);
}

const char* status_name(voxseg::CvStatus s) {
    switch (s) {
        case voxseg::CvStatus::Converged: return "converged";
        case voxseg::CvStatus::MaxIters: return "max-iters";
        default: return "phase-collapse";
    }
}

struct SegmentArgs {
    std::string in, out, trace_path, debug_dir, json_path;
    std::string seed_text;
    std::string acceptance = "running-mean";
    voxseg::PipelineConfig config;
    int threads = 1;
};

int run_segment(SegmentArgs& a) {
    a.config.seed = parse_seed(a.seed_text);
    a.config.grow.acceptance = voxseg::acceptance_from_string(a.acceptance);
    const voxseg::VoxelVolume vol = voxseg::load_volume(a.in);

    const voxseg::PipelineResult res =
        voxseg::segment_pipeline(vol, a.config, voxseg::normalize_threads(a.threads));

    voxseg::save_mask(res.mask, a.out, vol.spacing);
    if (!a.trace_path.empty()) write_text(a.trace_path, res.trace.csv());
    if (!a.debug_dir.empty()) {
        std::filesystem::create_directories(a.debug_dir);
        const auto dir = std::filesystem::path(a.debug_dir);
        voxseg::save_mask(res.initial, (dir / "initial").string(), vol.spacing);
        voxseg::save_mask(res.closed, (dir / "closed").string(), vol.spacing);
    }
    if (!a.json_path.empty()) {
        nlohmann::ordered_json j;
        j["status"] = status_name(res.trace.status);
        j["iterations"] = res.trace.rows.empty() ? 0 : res.trace.rows.back().iter;
        j["n_mask"] = voxseg::count_true(res.mask);
        j["seconds"] = {{"blur", res.t_blur},
                        {"grow", res.t_grow},
                        {"close", res.t_close},
                        {"levelset", res.t_levelset}};
        write_text(a.json_path, j.dump(2) + "\n");
    }
    std::cout << "status: " << status_name(res.trace.status) << ", iterations: "
              << (res.trace.rows.empty() ? 0 : res.trace.rows.back().iter)
              << ", mask voxels: " << voxseg::count_true(res.mask) << "\n";
    return res.trace.status == voxseg::CvStatus::PhaseCollapse ? 3 : 0;
}

int exit_code_for(const std::string& code) {
    if (code == "args" || code == "dims" || code == "bounds") return 2;
    if (code == "collapse") return 3;
    if (code == "contour") return 4;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volumetric tumor contouring toolkit"};
    app.require_subcommand(1);

    // ---- phantom ----
    auto* cmd_phantom = app.add_subcommand("phantom", "Generate a synthetic volume + ground truth");
    std::string ph_dims, ph_spec, ph_out, ph_json;
    cmd_phantom->add_option("--dims", ph_dims, "nx,ny,nz")->required();
    cmd_phantom->add_option("--spec", ph_spec, "phantom spec JSON file")->required();
    cmd_phantom->add_option("--out", ph_out, "output basename (writes <out> and <out>_gt)")
        ->required();
    cmd_phantom->add_option("--json", ph_json, "write a generation summary JSON");

    // ---- segment ----
    auto* cmd_segment = app.add_subcommand("segment", "Run the full segmentation pipeline");
    SegmentArgs seg;
    cmd_segment->add_option("--in", seg.in, "input volume basename")->required();
    cmd_segment->add_option("--out", seg.out, "output mask basename")->required();
    cmd_segment->add_option("--seed", seg.seed_text, "seed voxel x,y,z")->required();
    cmd_segment->add_option("--threshold", seg.config.grow.threshold, "growing threshold");
    cmd_segment->add_option("--acceptance", seg.acceptance, "seed-fixed|running-mean");
    cmd_segment->add_option("--se-width", seg.config.se_width, "closing element width");
    cmd_segment->add_option("--sigma", seg.config.sigma, "Gaussian sigma");
    cmd_segment->add_option("--mu", seg.config.cv.mu, "length penalty");
    cmd_segment->add_option("--nu", seg.config.cv.nu, "inside-volume penalty");
    cmd_segment->add_option("--lambda1", seg.config.cv.lambda1, "outside fit weight");
    cmd_segment->add_option("--lambda2", seg.config.cv.lambda2, "inside fit weight");
    cmd_segment->add_option("--dt", seg.config.cv.dt, "time step");
    cmd_segment->add_option("--epsilon", seg.config.cv.epsilon, "Dirac width");
    cmd_segment->add_option("--max-iters", seg.config.cv.max_iters, "iteration cap");
    cmd_segment->add_option("--stop-tol", seg.config.cv.stop_tol, "sign-flip stop fraction");
    cmd_segment->add_option("--redistance-every", seg.config.cv.redistance_every,
                            "redistancing interval (0 = off)");
    cmd_segment->add_option("--threads", seg.threads, "worker threads");
    cmd_segment->add_option("--trace", seg.trace_path, "write per-iteration CSV trace");
    cmd_segment->add_option("--debug-dir", seg.debug_dir, "persist stage masks here");
    cmd_segment->add_option("--json", seg.json_path, "write a run summary JSON");
    cmd_segment->add_flag("--blur-before-grow", seg.config.blur_before_grow,
                          "grow on the smoothed volume");

    // ---- evaluate ----
    auto* cmd_eval = app.add_subcommand("evaluate", "Compare a segmentation against a reference");
    std::string ev_ref, ev_seg, ev_json;
    cmd_eval->add_option("--ref", ev_ref, "reference mask basename")->required();
    cmd_eval->add_option("--seg", ev_seg, "segmented mask basename")->required();
    cmd_eval->add_option("--json", ev_json, "write the report JSON here");

    // ---- vocal ----
    auto* cmd_vocal = app.add_subcommand("vocal", "Rotational-contour comparator");
    cmd_vocal->require_subcommand(1);
    auto* cmd_slice = cmd_vocal->add_subcommand("slice", "Extract the six planar contours");
    std::string vs_in, vs_out, vs_axis;
    double vs_dr = 0.25;
    cmd_slice->add_option("--in", vs_in, "mask basename")->required();
    cmd_slice->add_option("--out", vs_out, "contour basename (writes <out>_<angle>.json)")
        ->required();
    cmd_slice->add_option("--axis-point", vs_axis, "axis x,y (default: mask centroid)");
    cmd_slice->add_option("--dr", vs_dr, "radial sampling step");

    auto* cmd_recon = cmd_vocal->add_subcommand("reconstruct", "Rebuild a mask from contours");
    std::string vr_in, vr_out, vr_axis, vr_dims;
    bool vr_allow = false;
    cmd_recon->add_option("--in", vr_in, "contour basename")->required();
    cmd_recon->add_option("--out", vr_out, "output mask basename")->required();
    cmd_recon->add_option("--dims", vr_dims, "nx,ny,nz")->required();
    cmd_recon->add_option("--axis-point", vr_axis, "axis x,y (default: volume center)");
    cmd_recon->add_flag("--allow-non-star", vr_allow,
                        "keep the outermost crossing on non-star rays instead of failing");

    // ---- overlay ----
    auto* cmd_overlay = app.add_subcommand("overlay", "Export a PGM slice with the mask boundary");
    std::string ov_in, ov_mask, ov_out, ov_axis = "z";
    int ov_index = 0;
    cmd_overlay->add_option("--in", ov_in, "volume basename")->required();
    cmd_overlay->add_option("--mask", ov_mask, "mask basename")->required();
    cmd_overlay->add_option("--out", ov_out, "PGM output path")->required();
    cmd_overlay->add_option("--axis", ov_axis, "slice axis x|y|z");
    cmd_overlay->add_option("--index", ov_index, "slice index")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "ERROR args: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*cmd_phantom) {
            const voxseg::Dims dims = parse_dims(ph_dims);
            const voxseg::PhantomSpec spec = voxseg::load_phantom_spec(ph_spec);
            const auto [vol, gt] = voxseg::generate_phantom(dims, spec);
            voxseg::save_volume(vol, ph_out);
            voxseg::save_mask(gt, ph_out + "_gt", vol.spacing);
            if (!ph_json.empty()) {
                nlohmann::ordered_json j;
                j["dims"] = {dims.nx, dims.ny, dims.nz};
                j["n_mask"] = voxseg::count_true(gt);
                write_text(ph_json, j.dump(2) + "\n");
            }
            std::cout << "phantom written: " << ph_out << " (" << voxseg::count_true(gt)
                      << " mask voxels)\n";
            return 0;
        }
        if (*cmd_segment) return run_segment(seg);
        if (*cmd_eval) {
            const voxseg::BinaryMask ref = voxseg::load_mask(ev_ref);
            const voxseg::BinaryMask sg = voxseg::load_mask(ev_seg);
            const voxseg::SimilarityReport rep = voxseg::similarity(ref, sg);
            const auto j = voxseg::report_to_json(rep);
            if (!ev_json.empty()) write_text(ev_json, j.dump(2) + "\n");
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (*cmd_slice) {
            const voxseg::BinaryMask mask = voxseg::load_mask(vs_in);
            std::array<double, 2> axis{};
            if (vs_axis.empty()) {
                axis = voxseg::mask_centroid_xy(mask);
            } else {
                const auto v = parse_tuple(vs_axis, 2, "--axis-point");
                axis = {v[0], v[1]};
            }
            for (const double angle : voxseg::vocal_angles()) {
                const voxseg::PlanarContour c =
                    voxseg::slice_at_angle(mask, axis, angle, vs_dr);
                char suffix[16];
                std::snprintf(suffix, sizeof suffix, "_%03d.json",
                              static_cast<int>(angle));
                voxseg::save_contour(c, vs_out + suffix);
            }
            std::cout << "contours written: " << vs_out << "_{000..150}.json\n";
            return 0;
        }
        if (*cmd_recon) {
            const voxseg::Dims dims = parse_dims(vr_dims);
            std::array<double, 2> axis{(dims.nx - 1) / 2.0, (dims.ny - 1) / 2.0};
            if (!vr_axis.empty()) {
                const auto v = parse_tuple(vr_axis, 2, "--axis-point");
                axis = {v[0], v[1]};
            }
            std::vector<voxseg::PlanarContour> contours;
            for (const double angle : voxseg::vocal_angles()) {
                char suffix[16];
                std::snprintf(suffix, sizeof suffix, "_%03d.json",
                              static_cast<int>(angle));
                contours.push_back(voxseg::load_contour(vr_in + suffix));
            }
            const voxseg::VocalResult res = voxseg::vocal_reconstruct(
                contours, dims, axis,
                vr_allow ? voxseg::ScanPolicy::Outermost : voxseg::ScanPolicy::Strict);
            voxseg::save_mask(res.mask, vr_out);
            std::int64_t violations = 0;
            for (const auto v : res.violations) violations += v;
            std::cout << "reconstructed " << voxseg::count_true(res.mask) << " voxels, "
                      << violations << " non-star rays\n";
            return 0;
        }
        if (*cmd_overlay) {
            const voxseg::VoxelVolume vol = voxseg::load_volume(ov_in);
            const voxseg::BinaryMask mask = voxseg::load_mask(ov_mask);
            voxseg::export_overlay(vol, mask, voxseg::axis_from_string(ov_axis), ov_index,
                                   ov_out);
            std::cout << "overlay written: " << ov_out << "\n";
            return 0;
        }
    } catch (const voxseg::Error& e) {
        std::cerr << "ERROR " << e.code() << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "ERROR internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
