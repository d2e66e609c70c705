#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace msentry {

// Analyzer hard failure: the input claimed a format we route but could not be
// parsed far enough to judge. Scans catch this and label the file Error.
class ScanError : public std::runtime_error {
public:
    explicit ScanError(const std::string& msg) : std::runtime_error(msg) {}
};

class ZipError : public ScanError {
public:
    ZipError(const std::string& msg, std::uint64_t offset)
        : ScanError(msg + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    std::uint64_t offset() const { return offset_; }

private:
    std::uint64_t offset_;
};

class PolicyError : public std::runtime_error {
public:
    explicit PolicyError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace msentry
