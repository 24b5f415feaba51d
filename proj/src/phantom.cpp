#include "s2f/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "s2f/rng.hpp"

namespace s2f {

namespace {

void validate(const PhantomSpec& spec) {
    if (!(spec.depth_extent_um > 0.0)) throw std::invalid_argument("phantom: depth_extent must be > 0");
    if (spec.layers.empty()) throw std::invalid_argument("phantom: at least one layer required");
    if (spec.lateral_alines < 1) throw std::invalid_argument("phantom: lateral_alines must be >= 1");
    if (!(spec.axial_cell_um > 0.0)) throw std::invalid_argument("phantom: axial_cell_um must be > 0");
    if (spec.decorrelation_fraction < 0.0 || spec.decorrelation_fraction > 1.0)
        throw std::invalid_argument("phantom: decorrelation_fraction must be in [0,1]");
    double prev_bottom = -1.0;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (!(l.z_bottom_um > l.z_top_um))
            throw std::invalid_argument("phantom: layer " + std::to_string(i) + " has z_bottom <= z_top");
        if (l.z_top_um < prev_bottom)
            throw std::invalid_argument("phantom: layer " + std::to_string(i) +
                                        " overlaps its predecessor (layers must be sorted, disjoint)");
        if (l.scatterer_density < 1.0)
            throw std::invalid_argument("phantom: layer " + std::to_string(i) + " scatterer_density must be >= 1");
        if (l.mean_reflectivity < 0.0)
            throw std::invalid_argument("phantom: layer " + std::to_string(i) + " mean_reflectivity must be >= 0");
        if (l.z_top_um < 0.0 || l.z_bottom_um > spec.depth_extent_um)
            throw std::invalid_argument("phantom: layer " + std::to_string(i) + " outside depth extent");
        prev_bottom = l.z_bottom_um;
    }
}

}  // namespace

PhantomModel::PhantomModel(PhantomSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    per_layer_count_.reserve(spec_.layers.size());
    for (const LayerSpec& l : spec_.layers) {
        const double thickness = l.z_bottom_um - l.z_top_um;
        const int n = std::max(1, static_cast<int>(std::llround(l.scatterer_density * thickness / spec_.axial_cell_um)));
        per_layer_count_.push_back(n);
        total_per_aline_ += n;
    }
    std::uint64_t h = derive_seed(spec_.seed, {static_cast<std::uint64_t>(spec_.layers.size()),
                                               static_cast<std::uint64_t>(spec_.lateral_alines)});
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ph-%016llx", static_cast<unsigned long long>(h));
    id_ = buf;
}

double PhantomModel::reflectivity(double z_um, int /*aline*/) const {
    for (const LayerSpec& l : spec_.layers) {
        if (z_um >= l.z_top_um && z_um < l.z_bottom_um) {
            const double zc = 0.5 * (l.z_top_um + l.z_bottom_um);
            return std::max(0.0, l.mean_reflectivity + l.reflectivity_gradient * (z_um - zc));
        }
    }
    return 0.0;
}

PhantomModel build_phantom(const PhantomSpec& spec) { return PhantomModel(spec); }

ScattererField realize_scatterers(const PhantomModel& model, std::uint64_t repeat_seed) {
    const PhantomSpec& spec = model.spec();
    ScattererField field;
    field.repeat_seed = repeat_seed;
    field.alines.resize(static_cast<std::size_t>(spec.lateral_alines));

    const double frac = spec.decorrelation_fraction;
    for (int a = 0; a < spec.lateral_alines; ++a) {
        auto& list = field.alines[static_cast<std::size_t>(a)];
        list.reserve(static_cast<std::size_t>(model.scatterers_per_aline()));
        int idx = 0;
        for (std::size_t li = 0; li < spec.layers.size(); ++li) {
            const LayerSpec& l = spec.layers[li];
            const int n = model.scatterers_per_layer()[li];
            const double amp_scale = 1.0 / std::sqrt(l.scatterer_density);
            for (int i = 0; i < n; ++i, ++idx) {
                // A scatterer is "volatile" (re-randomized per repeat) based on
                // a repeat-independent coin, so any two repeats share exactly
                // the stable subset.
                bool use_repeat_stream = true;
                if (frac < 1.0) {
                    Rng coin(derive_seed(spec.seed, {0xC01Dull, static_cast<std::uint64_t>(a),
                                                     static_cast<std::uint64_t>(idx)}));
                    use_repeat_stream = coin.uniform() < frac;
                }
                const std::uint64_t stream = use_repeat_stream ? repeat_seed : spec.seed;
                Rng rng(derive_seed(stream, {0x5CA7ull, static_cast<std::uint64_t>(a),
                                             static_cast<std::uint64_t>(idx)}));
                Scatterer s;
                s.z_um = rng.uniform(l.z_top_um, l.z_bottom_um);
                s.phase = rng.uniform() * 6.283185307179586476925286766559;
                s.amplitude = std::sqrt(model.reflectivity(s.z_um, a)) * amp_scale;
                list.push_back(s);
            }
        }
    }
    return field;
}

}  // namespace s2f
