#pragma once

#include "stochlab/errors.hpp"

#include <bit>
#include <complex>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace stochlab::io {

static_assert(std::endian::native == std::endian::little, "binary snapshots assume a little-endian host");

class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
        if (!out_) throw Error("cannot open '" + path + "' for writing");
    }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void f64s(std::span<const double> v) { raw(v.data(), v.size_bytes()); }
    void complexes(std::span<const std::complex<double>> v) { raw(v.data(), v.size_bytes()); }
    void close() {
        out_.close();
        if (!out_) throw Error("failed writing '" + path_ + "'");
    }

private:
    void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    std::ofstream out_;
    std::string path_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw Error("cannot open '" + path + "' for reading");
    }
    std::uint64_t u64() {
        std::uint64_t v;
        raw(&v, sizeof v);
        return v;
    }
    double f64() {
        double v;
        raw(&v, sizeof v);
        return v;
    }
    std::vector<double> f64s(std::size_t n) {
        std::vector<double> v(n);
        raw(v.data(), n * sizeof(double));
        return v;
    }
    std::vector<std::complex<double>> complexes(std::size_t n) {
        std::vector<std::complex<double>> v(n);
        raw(v.data(), n * sizeof(std::complex<double>));
        return v;
    }

private:
    void raw(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) throw Error("truncated snapshot '" + path_ + "'");
    }
    std::ifstream in_;
    std::string path_;
};

// Shortest round-trip decimal text for a double; used by every CSV writer.
std::string format_double(double v);

}  // namespace stochlab::io
