#include "s2f/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "s2f/io.hpp"

namespace s2f {

using nlohmann::json;

namespace {

Roi parse_roi(const json& j, RoiLabel label, const std::string& name) {
    Roi r;
    r.r0 = j.at("r0").get<int>();
    r.r1 = j.at("r1").get<int>();
    r.c0 = j.at("c0").get<int>();
    r.c1 = j.at("c1").get<int>();
    r.label = label;
    r.name = j.value("name", name);
    return r;
}

json roi_to_json(const Roi& r) {
    return json{{"r0", r.r0}, {"r1", r.r1}, {"c0", r.c0}, {"c1", r.c1}, {"name", r.name}};
}

void validate(const ExperimentConfig& c) {
    if (c.version != 1) throw std::invalid_argument("config: unsupported version");
    if (c.output_dir.empty()) throw std::invalid_argument("config: output_dir is required");
    if (c.n_bscans < 1 || c.n_repeats < 1) throw std::invalid_argument("config: volume dims must be >= 1");
    if (!(c.split_ratio > 0.0)) throw std::invalid_argument("config: split_ratio must be positive");
    if (c.eval_images < 1) throw std::invalid_argument("config: eval_images must be >= 1");
    if (c.clean_realizations < 1) throw std::invalid_argument("config: clean_realizations must be >= 1");

    // phantom invariants (throws on overlap etc.)
    (void)build_phantom(c.phantom);

    // spectrum + windows must be constructible up front
    const SourceSpectrum spectrum = c.make_spectrum();
    for (const double center : c.centers) (void)make_gaussian_window(center, c.bandwidth_fraction, spectrum);

    // recon geometry
    Volume probe;
    probe.n_k = c.n_k;
    probe.n_alines = c.phantom.lateral_alines;
    probe.n_bscans = 1;
    probe.n_repeats = 1;
    probe.k_min = spectrum.k_min();
    probe.k_max = spectrum.k_max();
    std::size_t padded = 1;
    while (padded < static_cast<std::size_t>(c.n_k) * static_cast<std::size_t>(c.recon.zero_padding))
        padded <<= 1;
    if (c.recon.zero_padding < 1) throw std::invalid_argument("config: zero_padding must be >= 1");
    if (c.recon.keep_depth_pixels < 1 ||
        static_cast<std::size_t>(c.recon.keep_depth_pixels) > padded / 2)
        throw std::invalid_argument("config: keep_depth_pixels out of range for this grid");
    if (!(c.recon.log_floor_percentile >= 0.0 &&
          c.recon.log_floor_percentile < c.recon.log_ceil_percentile &&
          c.recon.log_ceil_percentile <= 100.0))
        throw std::invalid_argument("config: log percentiles invalid");

    // network divisibility
    const int div = c.train.arch.divisor();
    if (c.recon.keep_depth_pixels % div != 0 || c.phantom.lateral_alines % div != 0)
        throw std::invalid_argument("config: image dims must be divisible by 2^levels");
    if (c.train.batch_size < 1 || c.train.epochs < 1)
        throw std::invalid_argument("config: train batch_size/epochs must be >= 1");
    if (!(c.train.learning_rate > 0.0)) throw std::invalid_argument("config: learning_rate must be > 0");

    // ROIs inside the image
    const int rows = c.recon.keep_depth_pixels, cols = c.phantom.lateral_alines;
    auto check_roi = [rows, cols](const Roi& r) {
        if (r.r0 < 0 || r.c0 < 0 || r.r1 > rows || r.c1 > cols || r.r0 >= r.r1 || r.c0 >= r.c1)
            throw std::invalid_argument("config: ROI '" + r.name + "' outside the image or empty");
    };
    check_roi(c.background_roi);
    if (c.structure_rois.empty()) throw std::invalid_argument("config: need at least one structure ROI");
    for (const Roi& r : c.structure_rois) check_roi(r);
}

}  // namespace

SourceSpectrum ExperimentConfig::make_spectrum() const {
    return make_source_spectrum(lambda_min_nm, lambda_max_nm, fwhm_nm, static_cast<std::size_t>(n_k));
}

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }

    ExperimentConfig c;
    try {
        c.version = j.value("version", 1);
        c.seed = j.at("seed").get<std::uint64_t>();
        c.output_dir = j.at("output_dir").get<std::string>();

        const json& jp = j.at("phantom");
        c.phantom.depth_extent_um = jp.at("depth_extent_um").get<double>();
        c.phantom.axial_cell_um = jp.value("axial_cell_um", 1.5);
        c.phantom.lateral_alines = jp.value("lateral_alines", 500);
        c.phantom.seed = c.seed;
        c.phantom.decorrelation_fraction = jp.value("decorrelation_fraction", 1.0);
        for (const json& jl : jp.at("layers")) {
            LayerSpec l;
            l.z_top_um = jl.at("z_top_um").get<double>();
            l.z_bottom_um = jl.at("z_bottom_um").get<double>();
            l.mean_reflectivity = jl.at("mean_reflectivity").get<double>();
            l.scatterer_density = jl.value("scatterer_density", 6.0);
            l.reflectivity_gradient = jl.value("reflectivity_gradient", 0.0);
            c.phantom.layers.push_back(l);
        }

        const json& js = j.at("spectrum");
        c.lambda_min_nm = js.at("lambda_min_nm").get<double>();
        c.lambda_max_nm = js.at("lambda_max_nm").get<double>();
        c.fwhm_nm = js.at("fwhm_nm").get<double>();
        c.n_k = js.value("n_k", 2048);

        if (j.contains("noise")) {
            const json& jn = j.at("noise");
            c.noise.detector_noise_std = jn.value("detector_noise_std", 0.0);
            const std::string mode = jn.value("mode", "physical_speckle");
            if (mode == "physical_speckle")
                c.noise.mode = NoiseMode::physical_speckle;
            else if (mode == "additive_gaussian_on_image")
                c.noise.mode = NoiseMode::additive_gaussian_on_image;
            else
                throw std::invalid_argument("config: unknown noise mode '" + mode + "'");
        }

        const json& jv = j.at("volume");
        c.n_bscans = jv.at("n_bscans").get<int>();
        c.n_repeats = jv.value("n_repeats", 2);

        const json& jr = j.at("recon");
        c.recon.zero_padding = jr.value("zero_padding", 1);
        c.recon.keep_depth_pixels = jr.at("keep_depth_pixels").get<int>();
        c.recon.log_floor_percentile = jr.value("log_floor_percentile", 1.0);
        c.recon.log_ceil_percentile = jr.value("log_ceil_percentile", 99.9);

        if (j.contains("windows")) {
            const json& jw = j.at("windows");
            if (jw.contains("centers")) c.centers = jw.at("centers").get<std::vector<double>>();
            c.bandwidth_fraction = jw.value("bandwidth_fraction", 0.5);
        }
        c.n2n_swap_repeats = j.value("n2n_swap_repeats", false);

        const json& jt = j.at("train");
        c.train.scheme = scheme_from_name(jt.value("scheme", "s2f"));
        c.train.batch_size = jt.value("batch_size", 2);
        c.train.epochs = jt.value("epochs", 60);
        c.train.learning_rate = jt.value("learning_rate", 1e-3);
        c.train.patience = jt.value("patience", 15);
        c.train.report_interval = jt.value("report_interval", 10);
        c.train.arch.levels = jt.value("levels", 3);
        c.train.arch.base_channels = jt.value("base_channels", 16);
        c.train.seed = c.seed;
        c.split_ratio = jt.value("split_ratio", 4.0);
        if (j.contains("n2v")) {
            c.train.n2v_mask_count = j.at("n2v").value("mask_count", 256);
            c.train.n2v_radius = j.at("n2v").value("neighborhood_radius", 2);
        }

        const json& je = j.at("eval");
        c.eval_images = je.value("n_images", 30);
        c.eval_seed_offset = je.value("test_seed_offset", static_cast<std::uint64_t>(9001));
        c.clean_realizations = je.value("clean_realizations", 128);
        c.denoise_subband_input = je.value("denoise_subband_input", false);
        c.background_roi = parse_roi(je.at("rois").at("background"), RoiLabel::background, "background");
        int idx = 0;
        for (const json& jroi : je.at("rois").at("structure"))
            c.structure_rois.push_back(parse_roi(jroi, RoiLabel::structure, "structure" + std::to_string(idx++)));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: missing or malformed field: ") + e.what());
    }

    validate(c);
    c.config_hash = [&c] {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(canonical_json(c))));
        return std::string(buf);
    }();
    return c;
}

void apply_overrides(ExperimentConfig& config, std::optional<std::uint64_t> seed,
                     std::optional<std::filesystem::path> output_dir) {
    if (seed) {
        config.seed = *seed;
        config.phantom.seed = *seed;
        config.train.seed = *seed;
    }
    if (output_dir) config.output_dir = *output_dir;
    validate(config);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canonical_json(config))));
    config.config_hash = buf;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("config: cannot open " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_json(const ExperimentConfig& c) {
    json layers = json::array();
    for (const LayerSpec& l : c.phantom.layers)
        layers.push_back(json{{"z_top_um", l.z_top_um},
                              {"z_bottom_um", l.z_bottom_um},
                              {"mean_reflectivity", l.mean_reflectivity},
                              {"scatterer_density", l.scatterer_density},
                              {"reflectivity_gradient", l.reflectivity_gradient}});
    json structures = json::array();
    for (const Roi& r : c.structure_rois) structures.push_back(roi_to_json(r));

    // output_dir is deliberately excluded: the hash identifies the
    // experiment, not where its files land
    const json j{
        {"version", c.version},
        {"seed", c.seed},
        {"phantom",
         {{"depth_extent_um", c.phantom.depth_extent_um},
          {"axial_cell_um", c.phantom.axial_cell_um},
          {"lateral_alines", c.phantom.lateral_alines},
          {"decorrelation_fraction", c.phantom.decorrelation_fraction},
          {"layers", layers}}},
        {"spectrum",
         {{"lambda_min_nm", c.lambda_min_nm},
          {"lambda_max_nm", c.lambda_max_nm},
          {"fwhm_nm", c.fwhm_nm},
          {"n_k", c.n_k}}},
        {"noise",
         {{"detector_noise_std", c.noise.detector_noise_std},
          {"mode", c.noise.mode == NoiseMode::physical_speckle ? "physical_speckle"
                                                               : "additive_gaussian_on_image"}}},
        {"volume", {{"n_bscans", c.n_bscans}, {"n_repeats", c.n_repeats}}},
        {"recon",
         {{"zero_padding", c.recon.zero_padding},
          {"keep_depth_pixels", c.recon.keep_depth_pixels},
          {"log_floor_percentile", c.recon.log_floor_percentile},
          {"log_ceil_percentile", c.recon.log_ceil_percentile}}},
        {"windows", {{"centers", c.centers}, {"bandwidth_fraction", c.bandwidth_fraction}}},
        {"n2n_swap_repeats", c.n2n_swap_repeats},
        {"train",
         {{"scheme", scheme_name(c.train.scheme)},
          {"batch_size", c.train.batch_size},
          {"epochs", c.train.epochs},
          {"learning_rate", c.train.learning_rate},
          {"patience", c.train.patience},
          {"levels", c.train.arch.levels},
          {"base_channels", c.train.arch.base_channels},
          {"split_ratio", c.split_ratio}}},
        {"n2v", {{"mask_count", c.train.n2v_mask_count}, {"neighborhood_radius", c.train.n2v_radius}}},
        {"eval",
         {{"n_images", c.eval_images},
          {"test_seed_offset", c.eval_seed_offset},
          {"clean_realizations", c.clean_realizations},
          {"denoise_subband_input", c.denoise_subband_input},
          {"rois", {{"background", roi_to_json(c.background_roi)}, {"structure", structures}}}}}};
    return j.dump();
}

}  // namespace s2f
