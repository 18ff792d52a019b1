#pragma once

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mfres {

// On-disk container used by all binary formats: one line of compact JSON,
// '\n', then the raw little-endian arrays announced by the header, then an
// optional trailing text section (CSV). Array sizes must be derivable from
// the header by the caller; the reader only splits the stream.
class BlobWriter {
public:
    explicit BlobWriter(nlohmann::json header) : header_(std::move(header)) {}

    void add_f64(std::span<const double> values);
    void add_u8(std::span<const std::uint8_t> values);
    void set_text(std::string text) { text_ = std::move(text); }

    void save(const std::string& path) const;

private:
    nlohmann::json header_;
    std::vector<std::vector<std::uint8_t>> blobs_;
    std::string text_;
};

class BlobReader {
public:
    explicit BlobReader(const std::string& path);

    const nlohmann::json& header() const { return header_; }
    // Consumes `count` elements from the current stream position.
    std::vector<double> read_f64(std::size_t count);
    std::vector<std::uint8_t> read_u8(std::size_t count);
    // Remaining bytes as text (the trailing CSV section).
    std::string read_text();

private:
    nlohmann::json header_;
    std::vector<std::uint8_t> payload_;
    std::size_t pos_ = 0;
};

// Exact round-trip float formatting for CSV output.
std::string format_f64(double v);

}  // namespace mfres
