#include "advi/tensor.hpp"

#include <string>

namespace advi {

int64_t shape_numel(const Shape& shape) {
    if (shape.empty()) throw ShapeError("empty shape");
    int64_t n = 1;
    for (int64_t e : shape) {
        if (e < 1) throw ShapeError("shape extent " + std::to_string(e) + " < 1");
        n *= e;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

}  // namespace advi
