#include "gf2.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lcnes::gf2 {

BitVec BitVec::from_bytes(const std::uint8_t* bits, std::size_t n) {
    BitVec v(n);
    for (std::size_t i = 0; i < n; ++i)
        if (bits[i]) v.set(i, true);
    return v;
}

void BitVec::clear() {
    std::fill(w_.begin(), w_.end(), 0);
}

BitVec& BitVec::operator^=(const BitVec& o) {
    if (o.n_ != n_) throw std::invalid_argument("BitVec xor: length mismatch");
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    return *this;
}

std::size_t BitVec::weight() const {
    std::size_t c = 0;
    for (std::uint64_t w : w_) c += std::size_t(__builtin_popcountll(w));
    return c;
}

bool BitVec::any() const {
    for (std::uint64_t w : w_)
        if (w) return true;
    return false;
}

void BitVec::resize(std::size_t n) {
    n_ = n;
    w_.assign(words_for(n), 0);
}

void BitVec::to_bytes(std::uint8_t* out) const {
    for (std::size_t i = 0; i < n_; ++i) out[i] = get(i) ? 1 : 0;
}

std::string BitVec::to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

BitMatrix BitMatrix::identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

void BitMatrix::xor_rows(std::size_t dst, std::size_t src) {
    std::uint64_t* d = row(dst);
    const std::uint64_t* s = row(src);
    for (std::size_t i = 0; i < wpr_; ++i) d[i] ^= s[i];
}

void BitMatrix::swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    std::uint64_t* ra = row(a);
    std::uint64_t* rb = row(b);
    for (std::size_t i = 0; i < wpr_; ++i) std::swap(ra[i], rb[i]);
}

BitVec BitMatrix::row_vec(std::size_t r) const {
    BitVec v(cols_);
    std::copy(row(r), row(r) + wpr_, v.words());
    return v;
}

void BitMatrix::set_row(std::size_t r, const BitVec& v) {
    if (v.size() != cols_) throw std::invalid_argument("set_row: length mismatch");
    std::copy(v.words(), v.words() + wpr_, row(r));
}

bool BitMatrix::is_zero() const {
    for (std::uint64_t w : bits_)
        if (w) return false;
    return true;
}

BitVec BitMatrix::times_vec(const BitVec& v) const {
    if (v.size() != cols_) throw std::invalid_argument("times_vec: length mismatch");
    BitVec out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        const std::uint64_t* rw = row(r);
        std::uint64_t acc = 0;
        for (std::size_t i = 0; i < wpr_; ++i) acc ^= rw[i] & v.word(i);
        out.set(r, __builtin_parityll(acc));
    }
    return out;
}

BitVec BitMatrix::left_mul(const BitVec& v) const {
    if (v.size() != rows_) throw std::invalid_argument("left_mul: length mismatch");
    BitVec out(cols_);
    v.for_each_set([&](std::size_t r) {
        const std::uint64_t* rw = row(r);
        for (std::size_t i = 0; i < wpr_; ++i) out.words()[i] ^= rw[i];
    });
    return out;
}

BitMatrix BitMatrix::transposed() const {
    BitMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        const std::uint64_t* rw = row(r);
        for (std::size_t wi = 0; wi < wpr_; ++wi) {
            std::uint64_t w = rw[wi];
            while (w) {
                const std::size_t c = wi * kWordBits + std::size_t(__builtin_ctzll(w));
                t.set(c, r, true);
                w &= w - 1;
            }
        }
    }
    return t;
}

BitMatrix BitMatrix::times(const BitMatrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("times: inner dimension mismatch");
    BitMatrix out(rows_, o.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        const std::uint64_t* rw = row(r);
        std::uint64_t* ow = out.row(r);
        for (std::size_t wi = 0; wi < wpr_; ++wi) {
            std::uint64_t w = rw[wi];
            while (w) {
                const std::size_t i = wi * kWordBits + std::size_t(__builtin_ctzll(w));
                const std::uint64_t* orow = o.row(i);
                for (std::size_t j = 0; j < o.wpr_; ++j) ow[j] ^= orow[j];
                w &= w - 1;
            }
        }
    }
    return out;
}

BitMatrix BitMatrix::select_columns(std::span<const int> cols) const {
    BitMatrix out(rows_, cols.size());
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t j = 0; j < cols.size(); ++j)
            if (get(r, std::size_t(cols[j]))) out.set(r, j, true);
    return out;
}

RowReduceResult row_reduce(const BitMatrix& m, std::span<const int> column_priority) {
    if (column_priority.size() != m.cols())
        throw std::invalid_argument("row_reduce: priority is not a column permutation");
    std::vector<char> seen(m.cols(), 0);
    for (int c : column_priority) {
        if (c < 0 || std::size_t(c) >= m.cols() || seen[std::size_t(c)])
            throw std::invalid_argument("row_reduce: priority is not a column permutation");
        seen[std::size_t(c)] = 1;
    }

    RowReduceResult res;
    res.reduced = m;
    BitMatrix& a = res.reduced;
    std::size_t pr = 0;  // next pivot row
    for (int c : column_priority) {
        if (pr >= a.rows()) break;
        std::size_t piv = pr;
        while (piv < a.rows() && !a.get(piv, std::size_t(c))) ++piv;
        if (piv == a.rows()) continue;
        a.swap_rows(pr, piv);
        for (std::size_t r = 0; r < a.rows(); ++r)
            if (r != pr && a.get(r, std::size_t(c))) a.xor_rows(r, pr);
        res.pivot_cols.push_back(c);
        ++pr;
    }
    res.rank = int(pr);
    return res;
}

RowReduceResult row_reduce(const BitMatrix& m) {
    std::vector<int> natural(m.cols());
    std::iota(natural.begin(), natural.end(), 0);
    return row_reduce(m, natural);
}

int rank(const BitMatrix& m) {
    return row_reduce(m).rank;
}

BitMatrix null_space_basis(const BitMatrix& m) {
    const std::size_t n = m.cols();
    RowReduceResult rr = row_reduce(m);
    std::vector<int> pivot_of_col(n, -1);
    for (std::size_t i = 0; i < rr.pivot_cols.size(); ++i)
        pivot_of_col[std::size_t(rr.pivot_cols[i])] = int(i);

    std::vector<int> free_cols;
    for (std::size_t c = 0; c < n; ++c)
        if (pivot_of_col[c] < 0) free_cols.push_back(int(c));

    BitMatrix basis(free_cols.size(), n);
    for (std::size_t b = 0; b < free_cols.size(); ++b) {
        const std::size_t fc = std::size_t(free_cols[b]);
        basis.set(b, fc, true);
        // pivot variable = sum of free variables appearing in its reduced row
        for (std::size_t i = 0; i < rr.pivot_cols.size(); ++i)
            if (rr.reduced.get(i, fc)) basis.set(b, std::size_t(rr.pivot_cols[i]), true);
    }
    return basis;
}

bool same_row_space(const BitMatrix& a, const BitMatrix& b) {
    if (a.cols() != b.cols()) return false;
    RowReduceResult ra = row_reduce(a);
    RowReduceResult rb = row_reduce(b);
    if (ra.rank != rb.rank) return false;
    // RREF with natural column order is canonical, compare nonzero rows
    for (std::size_t r = 0; r < std::size_t(ra.rank); ++r)
        if (ra.reduced.row_vec(r) != rb.reduced.row_vec(r)) return false;
    return true;
}

}  // namespace lcnes::gf2
