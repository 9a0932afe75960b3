#include "advi/data.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "advi/rng.hpp"

namespace advi {

namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

uint32_t read_be32(std::istream& f, const std::string& path) {
    uint8_t b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    if (!f) throw FormatError("unexpected end of file in '" + path + "'");
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 const std::string& name) {
    std::ifstream fi(images_path, std::ios::binary);
    if (!fi) throw IoError("cannot open image file '" + images_path + "'");
    std::ifstream fl(labels_path, std::ios::binary);
    if (!fl) throw IoError("cannot open label file '" + labels_path + "'");

    const uint32_t imagic = read_be32(fi, images_path);
    if (imagic != kImagesMagic)
        throw FormatError("bad magic in '" + images_path + "': expected 0x00000803");
    const uint32_t count = read_be32(fi, images_path);
    const uint32_t rows = read_be32(fi, images_path);
    const uint32_t cols = read_be32(fi, images_path);

    const uint32_t lmagic = read_be32(fl, labels_path);
    if (lmagic != kLabelsMagic)
        throw FormatError("bad magic in '" + labels_path + "': expected 0x00000801");
    const uint32_t lcount = read_be32(fl, labels_path);
    if (count != lcount)
        throw FormatError("image count " + std::to_string(count) + " != label count " +
                          std::to_string(lcount));

    Dataset ds;
    ds.name = name;
    ds.images = Tensor({count, 1, rows, cols});
    std::vector<uint8_t> buf(static_cast<size_t>(rows) * cols);
    for (uint32_t i = 0; i < count; ++i) {
        fi.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!fi) throw FormatError("truncated pixel data in '" + images_path + "'");
        float* dst = ds.images.ptr() + static_cast<int64_t>(i) * rows * cols;
        for (size_t p = 0; p < buf.size(); ++p) dst[p] = static_cast<float>(buf[p]) / 255.0f;
    }
    std::vector<uint8_t> lbuf(count);
    fl.read(reinterpret_cast<char*>(lbuf.data()), static_cast<std::streamsize>(count));
    if (!fl) throw FormatError("truncated label data in '" + labels_path + "'");
    ds.labels.assign(lbuf.begin(), lbuf.end());
    return ds;
}

Dataset filter_classes(const Dataset& ds, const std::vector<int>& keep) {
    ds.validate();
    std::vector<int> sorted = keep;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<int64_t> take;
    for (int64_t i = 0; i < ds.size(); ++i)
        if (std::binary_search(sorted.begin(), sorted.end(), ds.labels[static_cast<size_t>(i)]))
            take.push_back(i);
    if (take.empty()) throw EmptyDatasetError("filter_classes left no samples");

    const int64_t per = ds.images.numel() / ds.size();
    Shape s = ds.images.shape;
    s[0] = static_cast<int64_t>(take.size());
    Dataset out;
    out.name = ds.name;
    out.images = Tensor(s);
    out.labels.reserve(take.size());
    for (size_t k = 0; k < take.size(); ++k) {
        const int64_t i = take[k];
        std::copy(ds.images.data.begin() + i * per, ds.images.data.begin() + (i + 1) * per,
                  out.images.data.begin() + static_cast<int64_t>(k) * per);
        const int orig = ds.labels[static_cast<size_t>(i)];
        const int remapped = static_cast<int>(
            std::lower_bound(sorted.begin(), sorted.end(), orig) - sorted.begin());
        out.labels.push_back(remapped);
    }
    return out;
}

Dataset filter_correct(const SplitModel& model, const Dataset& ds, int batch_size) {
    ds.validate();
    if (batch_size < 1) throw ValueError("batch_size must be >= 1");

    std::vector<int64_t> take;
    const int64_t n = ds.size();
    const int64_t per = ds.images.numel() / std::max<int64_t>(n, 1);
    for (int64_t begin = 0; begin < n; begin += batch_size) {
        const int64_t end = std::min(n, begin + batch_size);
        Shape s = ds.images.shape;
        s[0] = end - begin;
        Tensor bx(s);
        std::copy(ds.images.data.begin() + begin * per, ds.images.data.begin() + end * per,
                  bx.data.begin());
        const std::vector<int> pred = predict(model, bx);
        for (int64_t i = begin; i < end; ++i)
            if (pred[static_cast<size_t>(i - begin)] == ds.labels[static_cast<size_t>(i)])
                take.push_back(i);
    }

    Shape s = ds.images.shape;
    s[0] = std::max<int64_t>(static_cast<int64_t>(take.size()), 1);
    Dataset out;
    out.name = ds.name;
    out.labels.reserve(take.size());
    if (take.empty()) {
        // keep the invariant "image count == label count" with a 0-sample view
        out.images = Tensor();
        return out;
    }
    out.images = Tensor(s);
    for (size_t k = 0; k < take.size(); ++k) {
        const int64_t i = take[k];
        std::copy(ds.images.data.begin() + i * per, ds.images.data.begin() + (i + 1) * per,
                  out.images.data.begin() + static_cast<int64_t>(k) * per);
        out.labels.push_back(ds.labels[static_cast<size_t>(i)]);
    }
    return out;
}

Dataset synth_generate(uint64_t seed, int n_per_class, int dims,
                       const std::vector<std::vector<float>>& class_centers, float noise_std) {
    if (n_per_class < 1 || dims < 1 || class_centers.empty())
        throw ValueError("synth_generate: need >=1 sample, >=1 dim and >=1 center");
    for (const auto& c : class_centers)
        if (static_cast<int>(c.size()) != dims)
            throw ShapeError("class center dimension mismatch");
    std::set<std::vector<float>> distinct(class_centers.begin(), class_centers.end());
    if (distinct.size() != class_centers.size())
        throw ValueError("synth_generate: class centers must be distinct");

    const int classes = static_cast<int>(class_centers.size());
    Dataset ds;
    ds.name = "synth";
    ds.images = Tensor({static_cast<int64_t>(classes) * n_per_class, 1, 1, dims});
    Rng rng(seed);
    float* p = ds.images.ptr();
    for (int c = 0; c < classes; ++c) {
        for (int i = 0; i < n_per_class; ++i) {
            for (int d = 0; d < dims; ++d) {
                const float v =
                    class_centers[static_cast<size_t>(c)][static_cast<size_t>(d)] +
                    noise_std * static_cast<float>(rng.normal());
                *p++ = std::clamp(v, 0.0f, 1.0f);
            }
            ds.labels.push_back(c);
        }
    }
    return ds;
}

Dataset dataset_head(const Dataset& ds, int64_t n) {
    ds.validate();
    if (n >= ds.size()) return ds;
    if (n < 1) throw ValueError("dataset_head: n must be >= 1");
    Shape s = ds.images.shape;
    s[0] = n;
    const int64_t per = ds.images.numel() / ds.size();
    Dataset out;
    out.name = ds.name;
    out.images = Tensor(s);
    std::copy(ds.images.data.begin(), ds.images.data.begin() + n * per, out.images.data.begin());
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + n);
    return out;
}

}  // namespace advi
