#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowsr {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A scalar argument is out of its admissible range (venc <= 0, tau <= 0, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Grids, decimation rates or kernels that do not fit together.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Velocities at or beyond VENC, which would wrap when encoded as phase.
class AliasingError : public Error {
public:
    AliasingError(std::size_t count, double venc)
        : Error(std::to_string(count) + " voxel(s) have |velocity| >= venc (" + std::to_string(venc) + " cm/s)"),
          voxel_count_(count) {}

    [[nodiscard]] std::size_t voxel_count() const noexcept { return voxel_count_; }

private:
    std::size_t voxel_count_;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class EmptyMaskError : public Error {
public:
    using Error::Error;
};

/// Malformed volume file. offset is the byte position where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace flowsr
