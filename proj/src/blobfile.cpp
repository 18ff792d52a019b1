#include "mfres/blobfile.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace mfres {

namespace {
// Files are written in little-endian order; this codebase targets
// little-endian hosts and byte-copies directly.
static_assert(std::endian::native == std::endian::little,
              "blob files assume a little-endian host");
}  // namespace

void BlobWriter::add_f64(std::span<const double> values) {
    std::vector<std::uint8_t> raw(values.size() * sizeof(double));
    std::memcpy(raw.data(), values.data(), raw.size());
    blobs_.push_back(std::move(raw));
}

void BlobWriter::add_u8(std::span<const std::uint8_t> values) {
    blobs_.emplace_back(values.begin(), values.end());
}

void BlobWriter::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << header_.dump() << '\n';
    for (const auto& blob : blobs_) {
        out.write(reinterpret_cast<const char*>(blob.data()),
                  static_cast<std::streamsize>(blob.size()));
    }
    if (!text_.empty()) out.write(text_.data(), static_cast<std::streamsize>(text_.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

BlobReader::BlobReader(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw std::runtime_error("missing header line: " + path);
    }
    header_ = nlohmann::json::parse(header_line);
    payload_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<double> BlobReader::read_f64(std::size_t count) {
    const std::size_t bytes = count * sizeof(double);
    if (pos_ + bytes > payload_.size()) throw std::runtime_error("blob file truncated");
    std::vector<double> values(count);
    std::memcpy(values.data(), payload_.data() + pos_, bytes);
    pos_ += bytes;
    return values;
}

std::vector<std::uint8_t> BlobReader::read_u8(std::size_t count) {
    if (pos_ + count > payload_.size()) throw std::runtime_error("blob file truncated");
    std::vector<std::uint8_t> values(payload_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                     payload_.begin() + static_cast<std::ptrdiff_t>(pos_ + count));
    pos_ += count;
    return values;
}

std::string BlobReader::read_text() {
    std::string text(payload_.begin() + static_cast<std::ptrdiff_t>(pos_), payload_.end());
    pos_ = payload_.size();
    return text;
}

std::string format_f64(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace mfres
