#pragma once

#include "gsig/numkernel.hpp"

#include <span>
#include <string>
#include <vector>

namespace gsig {

/// Named, flat view of a parameter or gradient tensor. Values are in
/// Eigen's (column-major) storage order; rows/cols give the logical shape.
template <typename T>
struct BasicTensorView {
    std::string name;
    std::span<T> values;
    Index rows = 0;
    Index cols = 0;
    bool trainable = true;
};

using TensorView = BasicTensorView<double>;
using ConstTensorView = BasicTensorView<const double>;

template <typename T, typename Dense>
BasicTensorView<T> make_view(std::string name, Dense& m, bool trainable) {
    return BasicTensorView<T>{std::move(name), std::span<T>(m.data(), static_cast<std::size_t>(m.size())),
                              m.rows(), m.cols(), trainable};
}

} // namespace gsig
