#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace s2f {

// One horizontal tissue band. Reflectivity is linear in depth inside the
// band: mean_reflectivity at the band center, slope reflectivity_gradient
// (per um), clamped at zero.
struct LayerSpec {
    double z_top_um = 0.0;
    double z_bottom_um = 0.0;
    double mean_reflectivity = 0.0;
    double scatterer_density = 1.0;  // scatterers per axial resolution cell
    double reflectivity_gradient = 0.0;
};

struct PhantomSpec {
    double depth_extent_um = 0.0;
    double axial_cell_um = 1.5;  // resolution cell used to interpret scatterer_density
    std::vector<LayerSpec> layers;
    int lateral_alines = 0;
    std::uint64_t seed = 0;
    // Fraction of scatterers re-randomized between repeats. 1.0 gives fully
    // independent speckle per repeat; <1 leaves a shared subset in place.
    double decorrelation_fraction = 1.0;
};

// Continuous reflectivity model r(z, x) plus the deterministic per-layer
// scatterer budget. Same spec (incl. seed) -> identical model.
class PhantomModel {
public:
    explicit PhantomModel(PhantomSpec spec);

    const PhantomSpec& spec() const { return spec_; }
    const std::vector<int>& scatterers_per_layer() const { return per_layer_count_; }
    int scatterers_per_aline() const { return total_per_aline_; }
    std::string id() const { return id_; }

    // r(z, x); x is the a-line index (layers are laterally uniform).
    double reflectivity(double z_um, int aline) const;

private:
    PhantomSpec spec_;
    std::vector<int> per_layer_count_;
    int total_per_aline_ = 0;
    std::string id_;
};

PhantomModel build_phantom(const PhantomSpec& spec);

struct Scatterer {
    double z_um;
    double amplitude;  // sqrt of local reflectivity per scatterer
    double phase;      // [0, 2 pi)
};

// One speckle realization: per a-line scatterer lists.
struct ScattererField {
    std::vector<std::vector<Scatterer>> alines;
    std::uint64_t repeat_seed = 0;
};

// Draw a realization. Positions uniform within each layer, phases i.i.d.
// uniform, amplitudes set so the ensemble-mean reconstructed intensity tracks
// r(z, x). Scatterer streams are derived per (a-line, index), so realization
// is order-independent.
ScattererField realize_scatterers(const PhantomModel& model, std::uint64_t repeat_seed);

}  // namespace s2f
