#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lcnes::gf2 {

inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) {
    return (bits + kWordBits - 1) / kWordBits;
}

// Packed binary vector, LSB-first within each 64-bit word.
// Bits at positions >= size() are kept zero so whole-word ops are safe.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(std::size_t n) : n_(n), w_(words_for(n), 0) {}

    static BitVec from_bytes(const std::uint8_t* bits, std::size_t n);

    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool v) {
        const std::uint64_t m = std::uint64_t(1) << (i & 63);
        if (v) w_[i >> 6] |= m; else w_[i >> 6] &= ~m;
    }
    void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t(1) << (i & 63); }
    void clear();

    BitVec& operator^=(const BitVec& o);
    bool operator==(const BitVec& o) const = default;

    std::size_t weight() const;
    bool any() const;

    std::size_t word_count() const { return w_.size(); }
    std::uint64_t word(std::size_t i) const { return w_[i]; }
    std::uint64_t* words() { return w_.data(); }
    const std::uint64_t* words() const { return w_.data(); }

    void resize(std::size_t n);

    // visits set bit indices in ascending order
    template <class F>
    void for_each_set(F&& f) const {
        for (std::size_t wi = 0; wi < w_.size(); ++wi) {
            std::uint64_t w = w_[wi];
            while (w) {
                f(wi * kWordBits + std::size_t(__builtin_ctzll(w)));
                w &= w - 1;
            }
        }
    }

    void to_bytes(std::uint8_t* out) const;
    std::string to_string() const;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

// Dense bit matrix, row-major packed rows. Stored words beyond `cols` are zero.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), wpr_(words_for(cols)), bits_(rows * wpr_, 0) {}

    static BitMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t words_per_row() const { return wpr_; }

    bool get(std::size_t r, std::size_t c) const {
        return (bits_[r * wpr_ + (c >> 6)] >> (c & 63)) & 1u;
    }
    void set(std::size_t r, std::size_t c, bool v) {
        const std::uint64_t m = std::uint64_t(1) << (c & 63);
        std::uint64_t& w = bits_[r * wpr_ + (c >> 6)];
        if (v) w |= m; else w &= ~m;
    }

    std::uint64_t* row(std::size_t r) { return bits_.data() + r * wpr_; }
    const std::uint64_t* row(std::size_t r) const { return bits_.data() + r * wpr_; }

    void xor_rows(std::size_t dst, std::size_t src);  // row[dst] ^= row[src]
    void swap_rows(std::size_t a, std::size_t b);

    BitVec row_vec(std::size_t r) const;
    void set_row(std::size_t r, const BitVec& v);

    bool is_zero() const;
    bool operator==(const BitMatrix& o) const = default;

    // M * v^T  (v has cols() bits, result has rows() bits)
    BitVec times_vec(const BitVec& v) const;
    // (row vector v) * M  (v has rows() bits, result has cols() bits)
    BitVec left_mul(const BitVec& v) const;

    BitMatrix transposed() const;
    BitMatrix times(const BitMatrix& o) const;

    BitMatrix select_columns(std::span<const int> cols) const;

private:
    std::size_t rows_ = 0, cols_ = 0, wpr_ = 0;
    std::vector<std::uint64_t> bits_;
};

struct RowReduceResult {
    BitMatrix reduced;            // reduced row-echelon form, rows in pivot order
    std::vector<int> pivot_cols;  // pivot columns in the order they were chosen
    int rank = 0;
};

// Reduced row-echelon form with pivots chosen greedily in column_priority order.
// Row space is preserved; rows beyond `rank` are zero.
RowReduceResult row_reduce(const BitMatrix& m, std::span<const int> column_priority);
RowReduceResult row_reduce(const BitMatrix& m);

int rank(const BitMatrix& m);

// Basis (as rows) of { x : m * x^T = 0 }. Result has cols(m) columns and
// cols(m) - rank(m) rows.
BitMatrix null_space_basis(const BitMatrix& m);

// True iff the row spaces of a and b are equal.
bool same_row_space(const BitMatrix& a, const BitMatrix& b);

}  // namespace lcnes::gf2
