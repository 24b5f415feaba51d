#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "s2f/forward_model.hpp"
#include "s2f/image.hpp"

namespace s2f {

// OCTI: magic "OCTI", u32 version=1, u32 n_k, u32 n_alines, u32 n_bscans,
// u32 n_repeats, f64 k_min, f64 k_max, then float32 LE data ordered
// (bscan, repeat, aline, k) with k fastest.
void write_octi(const std::filesystem::path& path, const Volume& volume);
Volume read_octi(const std::filesystem::path& path);

// OCTB: magic "OCTB", u32 version=1, u32 depth, u32 lateral, u8 scale code
// (0 linear, 1 log-normalized), float32 LE row-major (depth rows).
void write_octb(const std::filesystem::path& path, const BScanImage& image);
BScanImage read_octb(const std::filesystem::path& path);

// 8-bit binary PGM (P5) preview; [0,1] images map to [0,255].
void write_pgm(const std::filesystem::path& path, const BScanImage& image);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace s2f
