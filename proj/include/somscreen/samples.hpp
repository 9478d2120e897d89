#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "somscreen/errors.hpp"

namespace somscreen {

/// Row-major n x dim block of real samples.
class SampleMatrix {
public:
    SampleMatrix() = default;
    explicit SampleMatrix(std::size_t dim) : dim_(dim) {}
    SampleMatrix(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
        if (dim_ == 0 || values_.size() % dim_ != 0)
            throw InvalidArgument("sample block size is not a multiple of dim");
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ ? values_.size() / dim_ : 0; }
    bool empty() const noexcept { return values_.empty(); }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

    void push_back(std::span<const double> x) {
        if (x.size() != dim_) throw InvalidArgument("sample dimension mismatch");
        values_.insert(values_.end(), x.begin(), x.end());
    }

    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

}  // namespace somscreen
