#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace roadcast::te {

/// Dense row-major tensor. Production code instantiates float; gradient
/// checks instantiate double through the same templates.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape) { reshape(std::move(shape)); }

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

    void reshape(std::vector<int> shape) {
        std::int64_t n = 1;
        for (int d : shape) {
            if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
            n *= d;
        }
        shape_ = std::move(shape);
        data_.assign(static_cast<std::size_t>(n), T(0));
    }

    /// Keeps contents when the total size is unchanged, else zero-fills.
    void ensure_shape(const std::vector<int>& shape) {
        if (shape_ == shape) return;
        reshape(shape);
    }

    const std::vector<int>& shape() const { return shape_; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    T& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    const T& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
    int rank() const { return static_cast<int>(shape_.size()); }

    std::string shape_str() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape_[i]);
        }
        return s + "]";
    }

private:
    std::vector<int> shape_;
    std::vector<T> data_;
};

}  // namespace roadcast::te
