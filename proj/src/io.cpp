#include "s2f/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace s2f {

namespace {

void put_u32(std::ofstream& f, std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); }
void put_f64(std::ofstream& f, double v) { f.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t get_u32(std::ifstream& f) {
    std::uint32_t v;
    f.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double get_f64(std::ifstream& f) {
    double v;
    f.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
    return f;
}

}  // namespace

void write_octi(const std::filesystem::path& path, const Volume& volume) {
    auto f = open_out(path);
    f.write("OCTI", 4);
    put_u32(f, 1);
    put_u32(f, static_cast<std::uint32_t>(volume.n_k));
    put_u32(f, static_cast<std::uint32_t>(volume.n_alines));
    put_u32(f, static_cast<std::uint32_t>(volume.n_bscans));
    put_u32(f, static_cast<std::uint32_t>(volume.n_repeats));
    put_f64(f, volume.k_min);
    put_f64(f, volume.k_max);
    f.write(reinterpret_cast<const char*>(volume.data.data()),
            static_cast<std::streamsize>(volume.data.size() * sizeof(float)));
    if (!f) throw std::runtime_error("short write: " + path.string());
}

Volume read_octi(const std::filesystem::path& path) {
    auto f = open_in(path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "OCTI", 4) != 0)
        throw std::runtime_error("not an OCTI file: " + path.string());
    const std::uint32_t version = get_u32(f);
    if (version != 1) throw std::runtime_error("unsupported OCTI version in " + path.string());
    Volume v;
    v.n_k = static_cast<int>(get_u32(f));
    v.n_alines = static_cast<int>(get_u32(f));
    v.n_bscans = static_cast<int>(get_u32(f));
    v.n_repeats = static_cast<int>(get_u32(f));
    v.k_min = get_f64(f);
    v.k_max = get_f64(f);
    if (v.n_k < 2 || v.n_alines < 1 || v.n_bscans < 1 || v.n_repeats < 1 || !(v.k_max > v.k_min))
        throw std::runtime_error("corrupt OCTI header in " + path.string());
    const std::size_t count = static_cast<std::size_t>(v.n_k) * v.n_alines * v.n_bscans * v.n_repeats;
    v.data.resize(count);
    f.read(reinterpret_cast<char*>(v.data.data()), static_cast<std::streamsize>(count * sizeof(float)));
    if (!f) throw std::runtime_error("truncated OCTI data in " + path.string());
    for (const float x : v.data)
        if (!std::isfinite(x)) throw std::runtime_error("non-finite fringe sample in " + path.string());
    return v;
}

void write_octb(const std::filesystem::path& path, const BScanImage& image) {
    auto f = open_out(path);
    f.write("OCTB", 4);
    put_u32(f, 1);
    put_u32(f, static_cast<std::uint32_t>(image.rows));
    put_u32(f, static_cast<std::uint32_t>(image.cols));
    const std::uint8_t scale = image.scale == ImageScale::linear ? 0 : 1;
    f.write(reinterpret_cast<const char*>(&scale), 1);
    f.write(reinterpret_cast<const char*>(image.px.data()),
            static_cast<std::streamsize>(image.px.size() * sizeof(float)));
    if (!f) throw std::runtime_error("short write: " + path.string());
}

BScanImage read_octb(const std::filesystem::path& path) {
    auto f = open_in(path);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "OCTB", 4) != 0)
        throw std::runtime_error("not an OCTB file: " + path.string());
    const std::uint32_t version = get_u32(f);
    if (version != 1) throw std::runtime_error("unsupported OCTB version in " + path.string());
    BScanImage img;
    img.rows = static_cast<int>(get_u32(f));
    img.cols = static_cast<int>(get_u32(f));
    std::uint8_t scale = 0;
    f.read(reinterpret_cast<char*>(&scale), 1);
    if (img.rows < 1 || img.cols < 1 || scale > 1)
        throw std::runtime_error("corrupt OCTB header in " + path.string());
    img.scale = scale == 0 ? ImageScale::linear : ImageScale::log_normalized;
    img.px.resize(static_cast<std::size_t>(img.rows) * img.cols);
    f.read(reinterpret_cast<char*>(img.px.data()),
           static_cast<std::streamsize>(img.px.size() * sizeof(float)));
    if (!f) throw std::runtime_error("truncated OCTB data in " + path.string());
    return img;
}

void write_pgm(const std::filesystem::path& path, const BScanImage& image) {
    auto f = open_out(path);
    f << "P5\n" << image.cols << " " << image.rows << "\n255\n";
    std::string bytes(image.px.size(), '\0');
    for (std::size_t i = 0; i < image.px.size(); ++i) {
        const double v = std::clamp(static_cast<double>(image.px[i]), 0.0, 1.0);
        bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("short write: " + path.string());
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace s2f
