#pragma once

#include <stdexcept>
#include <string>

namespace advi {

// Base type for every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor arguments that do not satisfy an operation's shape contract.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Convolution/pooling hyperparameters that do not yield integer output sizes.
class GeometryError : public Error {
public:
    using Error::Error;
};

// Scalar arguments outside their documented range.
class ValueError : public Error {
public:
    using Error::Error;
};

// Filesystem-level failures (missing file, short read, failed rename).
class IoError : public Error {
public:
    using Error::Error;
};

// Structurally invalid files: bad magic, manifest/payload length mismatch.
class FormatError : public Error {
public:
    using Error::Error;
};

class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

class TrainingDivergedError : public Error {
public:
    using Error::Error;
};

// Attack cache built against different weights than the loaded model.
class StaleCacheError : public Error {
public:
    using Error::Error;
};

// Statistics over inputs with no variance (or otherwise degenerate).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Decision-based attack could not find a misclassified starting point.
class AnchorSearchError : public Error {
public:
    using Error::Error;
};

// Two effect tables do not cover the same channel sets.
class CoverageError : public Error {
public:
    using Error::Error;
};

class IncompleteBundleError : public Error {
public:
    using Error::Error;
};

}  // namespace advi
