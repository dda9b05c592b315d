#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "gexia/errors.hpp"

namespace gexia {

// Dense extents for rank 1..4 tensors. Every extent is strictly positive.
class Shape {
public:
    Shape() = default;

    Shape(std::initializer_list<std::int64_t> extents) {
        if (extents.size() < 1 || extents.size() > 4) {
            throw DimensionError("tensor rank must be 1..4, got " + std::to_string(extents.size()));
        }
        rank_ = static_cast<int>(extents.size());
        int i = 0;
        for (std::int64_t e : extents) {
            if (e <= 0) throw DimensionError("tensor extent must be positive, got " + std::to_string(e));
            dims_[i++] = e;
        }
    }

    static Shape of(const std::vector<std::int64_t>& extents) {
        Shape s;
        if (extents.size() < 1 || extents.size() > 4) {
            throw DimensionError("tensor rank must be 1..4, got " + std::to_string(extents.size()));
        }
        s.rank_ = static_cast<int>(extents.size());
        for (std::size_t i = 0; i < extents.size(); ++i) {
            if (extents[i] <= 0) throw DimensionError("tensor extent must be positive");
            s.dims_[i] = extents[i];
        }
        return s;
    }

    int rank() const { return rank_; }
    std::int64_t operator[](int i) const { return dims_[static_cast<std::size_t>(i)]; }

    std::int64_t numel() const {
        std::int64_t n = 1;
        for (int i = 0; i < rank_; ++i) n *= dims_[static_cast<std::size_t>(i)];
        return n;
    }

    // Row/column view of the trailing two axes; rank-1 acts as a column.
    std::int64_t rows() const { return rank_ == 1 ? dims_[0] : dims_[static_cast<std::size_t>(rank_ - 2)]; }
    std::int64_t cols() const { return rank_ == 1 ? 1 : dims_[static_cast<std::size_t>(rank_ - 1)]; }

    bool operator==(const Shape& o) const {
        if (rank_ != o.rank_) return false;
        for (int i = 0; i < rank_; ++i) {
            if (dims_[static_cast<std::size_t>(i)] != o.dims_[static_cast<std::size_t>(i)]) return false;
        }
        return true;
    }
    bool operator!=(const Shape& o) const { return !(*this == o); }

    std::string str() const {
        std::ostringstream os;
        os << '[';
        for (int i = 0; i < rank_; ++i) {
            if (i) os << 'x';
            os << dims_[static_cast<std::size_t>(i)];
        }
        os << ']';
        return os.str();
    }

private:
    std::array<std::int64_t, 4> dims_{1, 1, 1, 1};
    int rank_ = 0;
};

}  // namespace gexia
