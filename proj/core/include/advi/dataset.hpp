#pragma once

#include <string>
#include <vector>

#include "advi/tensor.hpp"

namespace advi {

// Immutable after construction; images live in [0,1].
struct Dataset {
    Tensor images;            // [B, 1, H, W] (or [B, 1, 1, D] for synthetic vectors)
    std::vector<int> labels;  // class indices, one per image
    std::string name;

    int64_t size() const { return images.rank() > 0 ? images.dim(0) : 0; }

    // Single sample as a batch-of-one tensor.
    Tensor sample(int64_t i) const {
        Shape s = images.shape;
        s[0] = 1;
        const int64_t n = shape_numel(s);
        Tensor out(s);
        std::copy(images.data.begin() + i * n, images.data.begin() + (i + 1) * n,
                  out.data.begin());
        return out;
    }

    void validate() const {
        if (images.rank() != 4) throw ShapeError("dataset images must be 4-D");
        if (static_cast<int64_t>(labels.size()) != images.dim(0))
            throw ShapeError("dataset has " + std::to_string(images.dim(0)) + " images but " +
                             std::to_string(labels.size()) + " labels");
    }
};

}  // namespace advi
