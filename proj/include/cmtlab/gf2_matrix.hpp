#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmtlab/error.hpp"

namespace cmtlab {

/// Dense matrix over GF(2) with row-major, 64-bit word packed storage.
///
/// Bit `c` of row `r` lives in word `c / 64` of that row at position `c % 64`.
/// Padding bits past `cols()` are kept zero so rows compare word-wise.
class Gf2Matrix {
public:
    using Word = std::uint64_t;
    static constexpr std::size_t kWordBits = 64;

    Gf2Matrix() = default;

    Gf2Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), stride_(words_for(cols)), bits_(rows * stride_, 0) {}

    static Gf2Matrix identity(std::size_t n) {
        Gf2Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m.set(i, i, true);
        }
        return m;
    }

    static constexpr std::size_t words_for(std::size_t bits) noexcept {
        return (bits + kWordBits - 1) / kWordBits;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t words_per_row() const noexcept { return stride_; }
    bool empty() const noexcept { return rows_ == 0; }

    bool get(std::size_t r, std::size_t c) const noexcept {
        return (bits_[r * stride_ + c / kWordBits] >> (c % kWordBits)) & 1U;
    }

    void set(std::size_t r, std::size_t c, bool v) noexcept {
        Word& w = bits_[r * stride_ + c / kWordBits];
        const Word mask = Word{1} << (c % kWordBits);
        w = v ? (w | mask) : (w & ~mask);
    }

    void flip(std::size_t r, std::size_t c) noexcept {
        bits_[r * stride_ + c / kWordBits] ^= Word{1} << (c % kWordBits);
    }

    std::span<Word> row(std::size_t r) noexcept { return {bits_.data() + r * stride_, stride_}; }
    std::span<const Word> row(std::size_t r) const noexcept { return {bits_.data() + r * stride_, stride_}; }

    std::size_t row_weight(std::size_t r) const noexcept {
        std::size_t w = 0;
        for (Word x : row(r)) {
            w += static_cast<std::size_t>(std::popcount(x));
        }
        return w;
    }

    bool row_is_zero(std::size_t r) const noexcept {
        return std::ranges::all_of(row(r), [](Word x) { return x == 0; });
    }

    /// row(dst) ^= row(src)
    void xor_row(std::size_t dst, std::size_t src) noexcept {
        Word* d = bits_.data() + dst * stride_;
        const Word* s = bits_.data() + src * stride_;
        for (std::size_t k = 0; k < stride_; ++k) {
            d[k] ^= s[k];
        }
    }

    void swap_rows(std::size_t a, std::size_t b) noexcept {
        if (a == b) {
            return;
        }
        std::swap_ranges(bits_.begin() + static_cast<std::ptrdiff_t>(a * stride_),
                         bits_.begin() + static_cast<std::ptrdiff_t>((a + 1) * stride_),
                         bits_.begin() + static_cast<std::ptrdiff_t>(b * stride_));
    }

    void append_row(std::span<const Word> words) {
        if (words.size() != stride_) {
            throw StructuralError("Gf2Matrix::append_row: width mismatch");
        }
        bits_.insert(bits_.end(), words.begin(), words.end());
        ++rows_;
    }

    void append_zero_row() {
        bits_.insert(bits_.end(), stride_, 0);
        ++rows_;
    }

    Gf2Matrix select_rows(std::span<const std::size_t> indices) const {
        Gf2Matrix out(indices.size(), cols_);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const auto src = row(indices[i]);
            std::ranges::copy(src, out.row(i).begin());
        }
        return out;
    }

    /// Rows [first, first + count).
    Gf2Matrix slice_rows(std::size_t first, std::size_t count) const {
        Gf2Matrix out(count, cols_);
        std::copy_n(bits_.begin() + static_cast<std::ptrdiff_t>(first * stride_), count * stride_,
                    out.bits_.begin());
        return out;
    }

    /// Vertical concatenation.
    static Gf2Matrix stack(const Gf2Matrix& top, const Gf2Matrix& bottom) {
        if (top.cols_ != bottom.cols_) {
            throw StructuralError("Gf2Matrix::stack: column count mismatch");
        }
        Gf2Matrix out(top.rows_ + bottom.rows_, top.cols_);
        std::ranges::copy(top.bits_, out.bits_.begin());
        std::ranges::copy(bottom.bits_,
                          out.bits_.begin() + static_cast<std::ptrdiff_t>(top.bits_.size()));
        return out;
    }

    /// GF(2) product; row i of the result is the XOR of rows j of `rhs` where lhs(i, j) = 1.
    friend Gf2Matrix operator*(const Gf2Matrix& lhs, const Gf2Matrix& rhs) {
        if (lhs.cols_ != rhs.rows_) {
            throw StructuralError("Gf2Matrix product: inner dimensions differ");
        }
        Gf2Matrix out(lhs.rows_, rhs.cols_);
        for (std::size_t i = 0; i < lhs.rows_; ++i) {
            Word* dst = out.bits_.data() + i * out.stride_;
            const auto lrow = lhs.row(i);
            for (std::size_t w = 0; w < lrow.size(); ++w) {
                Word bits = lrow[w];
                while (bits != 0) {
                    const std::size_t j = w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
                    bits &= bits - 1;
                    const Word* src = rhs.bits_.data() + j * rhs.stride_;
                    for (std::size_t k = 0; k < out.stride_; ++k) {
                        dst[k] ^= src[k];
                    }
                }
            }
        }
        return out;
    }

    friend bool operator==(const Gf2Matrix& a, const Gf2Matrix& b) noexcept {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.bits_ == b.bits_;
    }

    /// Lowest set column of row r, or cols() if the row is zero.
    std::size_t leading_column(std::size_t r) const noexcept {
        const auto words = row(r);
        for (std::size_t w = 0; w < words.size(); ++w) {
            if (words[w] != 0) {
                return w * kWordBits + static_cast<std::size_t>(std::countr_zero(words[w]));
            }
        }
        return cols_;
    }

    std::size_t rank() const {
        Gf2Matrix copy = *this;
        return copy.eliminate(nullptr).size();
    }

    /// In-place reduction to reduced row echelon form.
    ///
    /// Nonzero rows come first ordered by pivot column; every pivot column is
    /// zero outside its pivot row. The same row operations are replayed on
    /// `companion` when given (it must have the same row count). Returns the
    /// pivot columns in row order.
    std::vector<std::size_t> eliminate(Gf2Matrix* companion) {
        if (companion != nullptr && companion->rows_ != rows_) {
            throw StructuralError("Gf2Matrix::eliminate: companion row count mismatch");
        }
        std::vector<std::size_t> pivots;
        std::size_t lead = 0;
        for (std::size_t c = 0; c < cols_ && lead < rows_; ++c) {
            const std::size_t w = c / kWordBits;
            const Word mask = Word{1} << (c % kWordBits);
            std::size_t p = lead;
            while (p < rows_ && (bits_[p * stride_ + w] & mask) == 0) {
                ++p;
            }
            if (p == rows_) {
                continue;
            }
            swap_rows(lead, p);
            if (companion != nullptr) {
                companion->swap_rows(lead, p);
            }
            for (std::size_t r = 0; r < rows_; ++r) {
                if (r != lead && (bits_[r * stride_ + w] & mask) != 0) {
                    xor_row(r, lead);
                    if (companion != nullptr) {
                        companion->xor_row(r, lead);
                    }
                }
            }
            pivots.push_back(c);
            ++lead;
        }
        return pivots;
    }

    Gf2Matrix reduced() const {
        Gf2Matrix copy = *this;
        copy.eliminate(nullptr);
        return copy;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(rows_ * (cols_ + 1));
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t c = 0; c < cols_; ++c) {
                s.push_back(get(r, c) ? '1' : '0');
            }
            s.push_back('\n');
        }
        return s;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t stride_ = 0;
    std::vector<Word> bits_;
};

/// Row space of a growing set of GF(2) vectors, kept in reduced row echelon form.
///
/// Insertion costs O(rank * words). `unit_count()` is the number of unit vectors
/// e_i contained in the span, which equals the number of reduced rows of weight one.
class RowSpace {
public:
    explicit RowSpace(std::size_t width) : width_(width), basis_(0, width) {}

    std::size_t width() const noexcept { return width_; }
    std::size_t rank() const noexcept { return pivots_.size(); }
    bool full() const noexcept { return pivots_.size() == width_; }

    /// Adds a vector; returns true if it increased the rank.
    bool insert(std::span<const Gf2Matrix::Word> v) {
        if (v.size() != basis_.words_per_row()) {
            throw StructuralError("RowSpace::insert: width mismatch");
        }
        scratch_.assign(v.begin(), v.end());
        for (std::size_t i = 0; i < pivots_.size(); ++i) {
            const std::size_t p = pivots_[i];
            if ((scratch_[p / 64] >> (p % 64)) & 1U) {
                const auto b = basis_.row(i);
                for (std::size_t k = 0; k < scratch_.size(); ++k) {
                    scratch_[k] ^= b[k];
                }
            }
        }
        std::size_t lead = width_;
        for (std::size_t k = 0; k < scratch_.size(); ++k) {
            if (scratch_[k] != 0) {
                lead = k * 64 + static_cast<std::size_t>(std::countr_zero(scratch_[k]));
                break;
            }
        }
        if (lead == width_) {
            return false;
        }
        const std::size_t w = lead / 64;
        const Gf2Matrix::Word mask = Gf2Matrix::Word{1} << (lead % 64);
        for (std::size_t i = 0; i < pivots_.size(); ++i) {
            auto b = basis_.row(i);
            if ((b[w] & mask) != 0) {
                for (std::size_t k = 0; k < b.size(); ++k) {
                    b[k] ^= scratch_[k];
                }
            }
        }
        basis_.append_row(scratch_);
        pivots_.push_back(lead);
        return true;
    }

    /// Source indices i with e_i in the span.
    std::vector<std::size_t> unit_indices() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < pivots_.size(); ++i) {
            if (basis_.row_weight(i) == 1) {
                out.push_back(pivots_[i]);
            }
        }
        std::ranges::sort(out);
        return out;
    }

    std::size_t unit_count() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < pivots_.size(); ++i) {
            n += basis_.row_weight(i) == 1 ? 1 : 0;
        }
        return n;
    }

private:
    std::size_t width_;
    Gf2Matrix basis_;
    std::vector<std::size_t> pivots_;
    std::vector<Gf2Matrix::Word> scratch_;
};

}  // namespace cmtlab
