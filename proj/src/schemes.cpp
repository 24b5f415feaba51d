#include "s2f/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "s2f/rng.hpp"

namespace s2f {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::s2f: return "s2f";
        case Scheme::n2n: return "n2n";
        case Scheme::n2v: return "n2v";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "s2f") return Scheme::s2f;
    if (name == "n2n") return Scheme::n2n;
    if (name == "n2v") return Scheme::n2v;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected s2f, n2n or n2v)");
}

std::string SchemeDataset::manifest(const std::string& volume_name) const {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "# scheme=%s volume=%s pairs=%zu\n", scheme_name(scheme).c_str(),
                  volume_name.c_str(), pairs.size());
    out += buf;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "# window %zu: %s\n", i, windows[i].description.c_str());
        out += buf;
        for (std::size_t j = 0; j < i; ++j) {
            std::snprintf(buf, sizeof(buf), "# window-overlap %zu,%zu: %.9g\n", j, i,
                          window_overlap(windows[j], windows[i]));
            out += buf;
        }
    }
    auto ref_str = [&](const PairImageRef& r) {
        std::string w = r.window_index < 0 ? "full" : windows[static_cast<std::size_t>(r.window_index)].description;
        std::snprintf(buf, sizeof(buf), "%s:b%d:r%d:%s", volume_name.c_str(), r.bscan, r.repeat, w.c_str());
        return std::string(buf);
    };
    for (const TrainingPair& p : pairs) {
        std::string rec = "scheme=" + scheme_name(p.scheme) + " bscan=" + std::to_string(p.bscan) +
                          " input=" + ref_str(p.input) + " target=" + ref_str(p.target) + "\n";
        out += rec;
    }
    return out;
}

SchemeDataset make_s2f_dataset(const Volume& volume, const SourceSpectrum& spectrum,
                               const std::vector<double>& centers, double bandwidth_fraction) {
    if (volume.n_repeats < 2) throw std::invalid_argument("s2f dataset: volume needs >= 2 repeats");
    if (centers.empty()) throw std::invalid_argument("s2f dataset: centers list is empty");

    SchemeDataset ds;
    ds.scheme = Scheme::s2f;
    for (const double c : centers) ds.windows.push_back(make_gaussian_window(c, bandwidth_fraction, spectrum));

    ds.pairs.reserve(static_cast<std::size_t>(volume.n_bscans) * centers.size());
    for (int b = 0; b < volume.n_bscans; ++b) {
        for (std::size_t w = 0; w < centers.size(); ++w) {
            TrainingPair p;
            p.scheme = Scheme::s2f;
            p.bscan = b;
            p.input = {b, 0, static_cast<int>(w)};
            p.target = {b, 1, -1};
            ds.pairs.push_back(p);
        }
    }
    return ds;
}

SchemeDataset make_n2n_dataset(const Volume& volume, bool swap_repeats) {
    if (volume.n_repeats < 2) throw std::invalid_argument("n2n dataset: volume needs >= 2 repeats");
    SchemeDataset ds;
    ds.scheme = Scheme::n2n;
    ds.pairs.reserve(static_cast<std::size_t>(volume.n_bscans));
    const int in_rep = swap_repeats ? 1 : 0;
    const int tg_rep = swap_repeats ? 0 : 1;
    for (int b = 0; b < volume.n_bscans; ++b) {
        TrainingPair p;
        p.scheme = Scheme::n2n;
        p.bscan = b;
        p.input = {b, in_rep, -1};
        p.target = {b, tg_rep, -1};
        ds.pairs.push_back(p);
    }
    return ds;
}

SchemeDataset make_n2v_dataset(const Volume& volume) {
    SchemeDataset ds;
    ds.scheme = Scheme::n2v;
    ds.pairs.reserve(static_cast<std::size_t>(volume.n_bscans));
    for (int b = 0; b < volume.n_bscans; ++b) {
        TrainingPair p;
        p.scheme = Scheme::n2v;
        p.bscan = b;
        p.input = {b, 0, -1};
        p.target = {b, 0, -1};
        ds.pairs.push_back(p);
    }
    return ds;
}

MaskedImage apply_n2v_mask(const BScanImage& image, int mask_count, int neighborhood_radius,
                           std::uint64_t seed) {
    if (mask_count < 1) throw std::invalid_argument("n2v mask: mask_count must be >= 1");
    if (neighborhood_radius < 1) throw std::invalid_argument("n2v mask: radius must be >= 1");
    const long total = static_cast<long>(image.rows) * image.cols;
    if (mask_count > total) throw std::invalid_argument("n2v mask: mask_count exceeds pixel count");

    MaskedImage out;
    out.image = image;
    out.mask.assign(static_cast<std::size_t>(total), 0);

    // stratified site selection: one site per cell of a near-square grid
    const int gx = std::max(1, static_cast<int>(std::floor(
                                   std::sqrt(static_cast<double>(mask_count) * image.cols / image.rows))));
    const int gy = (mask_count + gx - 1) / gx;
    Rng rng(derive_seed(seed, {0x2B5Dull}));
    int placed = 0;
    for (int cy = 0; cy < gy && placed < mask_count; ++cy) {
        for (int cx = 0; cx < gx && placed < mask_count; ++cx) {
            const int r0 = cy * image.rows / gy, r1 = std::max(r0 + 1, (cy + 1) * image.rows / gy);
            const int c0 = cx * image.cols / gx, c1 = std::max(c0 + 1, (cx + 1) * image.cols / gx);
            const int r = r0 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(r1 - r0)));
            const int c = c0 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(c1 - c0)));
            const std::size_t site = static_cast<std::size_t>(r) * image.cols + c;
            if (out.mask[site]) continue;
            out.mask[site] = 1;
            ++placed;

            // replacement from the neighborhood, never the site itself
            const int rr0 = std::max(0, r - neighborhood_radius);
            const int rr1 = std::min(image.rows - 1, r + neighborhood_radius);
            const int cc0 = std::max(0, c - neighborhood_radius);
            const int cc1 = std::min(image.cols - 1, c + neighborhood_radius);
            int nr = r, nc = c;
            while (nr == r && nc == c) {
                nr = rr0 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(rr1 - rr0 + 1)));
                nc = cc0 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cc1 - cc0 + 1)));
            }
            out.image.at(r, c) = image.at(nr, nc);
        }
    }

    // grid rounding can leave a shortfall; fill with unmasked uniform sites
    while (placed < mask_count) {
        const std::size_t site = rng.uniform_index(static_cast<std::uint64_t>(total));
        if (out.mask[site]) continue;
        const int r = static_cast<int>(site) / image.cols;
        const int c = static_cast<int>(site) % image.cols;
        out.mask[site] = 1;
        ++placed;
        const int rr0 = std::max(0, r - neighborhood_radius);
        const int rr1 = std::min(image.rows - 1, r + neighborhood_radius);
        const int cc0 = std::max(0, c - neighborhood_radius);
        const int cc1 = std::min(image.cols - 1, c + neighborhood_radius);
        int nr = r, nc = c;
        while (nr == r && nc == c) {
            nr = rr0 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(rr1 - rr0 + 1)));
            nc = cc0 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cc1 - cc0 + 1)));
        }
        out.image.at(r, c) = image.at(nr, nc);
    }
    return out;
}

DatasetSplit split_train_val(const std::vector<TrainingPair>& pairs, double split_ratio,
                             std::uint64_t seed) {
    if (pairs.size() < 5) throw std::invalid_argument("split: need at least 5 pairs");
    if (!(split_ratio > 0.0)) throw std::invalid_argument("split: ratio must be positive");

    std::vector<int> groups;
    for (const TrainingPair& p : pairs)
        if (std::find(groups.begin(), groups.end(), p.bscan) == groups.end()) groups.push_back(p.bscan);
    if (groups.size() < 2) throw std::invalid_argument("split: need at least 2 distinct b-scans");
    std::sort(groups.begin(), groups.end());

    // seeded Fisher-Yates over the group list
    Rng rng(derive_seed(seed, {0x59171ull}));
    for (std::size_t i = groups.size() - 1; i > 0; --i) {
        const std::size_t j = rng.uniform_index(i + 1);
        std::swap(groups[i], groups[j]);
    }

    const double frac = split_ratio / (split_ratio + 1.0);
    const std::size_t train_target = static_cast<std::size_t>(std::floor(frac * static_cast<double>(pairs.size())));

    DatasetSplit split;
    split.split_ratio = split_ratio;
    split.seed = seed;
    std::vector<bool> to_train(groups.size(), false);
    std::size_t assigned = 0;
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        std::size_t gsize = 0;
        for (const TrainingPair& p : pairs)
            if (p.bscan == groups[gi]) ++gsize;
        if (assigned + gsize <= train_target) {
            to_train[gi] = true;
            assigned += gsize;
        }
    }
    // both sides must stay populated
    if (std::none_of(to_train.begin(), to_train.end(), [](bool b) { return b; })) to_train.front() = true;
    if (std::all_of(to_train.begin(), to_train.end(), [](bool b) { return b; })) to_train.back() = false;

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        for (const TrainingPair& p : pairs) {
            if (p.bscan != groups[gi]) continue;
            if (to_train[gi])
                split.train.push_back(p);
            else
                split.val.push_back(p);
        }
    }
    return split;
}

}  // namespace s2f
