// Copyright 2026 The SAIM Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace saim {

/// Row-major dense matrix. Rows are contiguous so a row can be handed out as a span.
template <class T>
class DenseMatrix {
 public:
    using value_type = T;

    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Build from nested rows; every row must have the same length.
    static DenseMatrix from_rows(const std::vector<std::vector<T>>& rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r ? rows.front().size() : 0;
        DenseMatrix out(r, c);
        for (std::size_t i = 0; i < r; ++i) {
            if (rows[i].size() != c) {
                throw std::invalid_argument("ragged matrix: row " + std::to_string(i) +
                                            " has " + std::to_string(rows[i].size()) +
                                            " entries, expected " + std::to_string(c));
            }
            for (std::size_t j = 0; j < c; ++j) out(i, j) = rows[i][j];
        }
        return out;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<const T> values() const { return data_; }

    /// Copy into a larger matrix, zero-filling the new rows and columns.
    DenseMatrix resized(std::size_t rows, std::size_t cols) const {
        DenseMatrix out(rows, cols);
        for (std::size_t i = 0; i < std::min(rows, rows_); ++i)
            for (std::size_t j = 0; j < std::min(cols, cols_); ++j) out(i, j) = (*this)(i, j);
        return out;
    }

    template <class U>
    DenseMatrix<U> cast() const {
        DenseMatrix<U> out(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(i, j) = static_cast<U>((*this)(i, j));
        return out;
    }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

}  // namespace saim
