#include "codes.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace lcnes::gf2 {

namespace {

// primitive polynomials over GF(2), degree m (bit i = coefficient of x^i)
constexpr std::uint32_t kPrimitivePoly[11] = {
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409,
};

struct GF2m {
    int m;
    int q;  // 2^m
    std::vector<int> exp_;  // exp_[i] = alpha^i, i in [0, 2q)
    std::vector<int> log_;  // log_[x] for x in [1, q)

    explicit GF2m(int m_) : m(m_), q(1 << m_), exp_(std::size_t(2 * q), 0), log_(std::size_t(q), 0) {
        const std::uint32_t poly = kPrimitivePoly[m];
        int x = 1;
        for (int i = 0; i < q - 1; ++i) {
            exp_[std::size_t(i)] = x;
            log_[std::size_t(x)] = i;
            x <<= 1;
            if (x & q) x ^= int(poly);
        }
        for (int i = q - 1; i < 2 * q; ++i) exp_[std::size_t(i)] = exp_[std::size_t(i - (q - 1))];
    }

    int mul(int a, int b) const {
        if (a == 0 || b == 0) return 0;
        return exp_[std::size_t(log_[std::size_t(a)] + log_[std::size_t(b)])];
    }
    int alpha_pow(int e) const {
        e %= (q - 1);
        if (e < 0) e += q - 1;
        return exp_[std::size_t(e)];
    }
};

std::vector<int> cyclotomic_coset(int s, int n) {
    std::vector<int> coset;
    int c = s % n;
    do {
        coset.push_back(c);
        c = (2 * c) % n;
    } while (c != s % n);
    std::sort(coset.begin(), coset.end());
    return coset;
}

// minimal polynomial of alpha^s: product over the coset of (x - alpha^j),
// coefficients land in {0,1}
std::vector<std::uint8_t> minimal_poly(const GF2m& gf, const std::vector<int>& coset) {
    std::vector<int> poly{1};  // over GF(2^m)
    for (int j : coset) {
        const int root = gf.alpha_pow(j);
        std::vector<int> next(poly.size() + 1, 0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i + 1] ^= poly[i];               // x * poly
            next[i] ^= gf.mul(poly[i], root);     // root * poly
        }
        poly = std::move(next);
    }
    std::vector<std::uint8_t> out(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        if (poly[i] != 0 && poly[i] != 1)
            throw std::logic_error("minimal polynomial has non-binary coefficient");
        out[i] = std::uint8_t(poly[i]);
    }
    return out;
}

std::vector<std::uint8_t> poly_mul_gf2(const std::vector<std::uint8_t>& a,
                                       const std::vector<std::uint8_t>& b) {
    std::vector<std::uint8_t> out(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i])
            for (std::size_t j = 0; j < b.size(); ++j) out[i + j] ^= b[j];
    return out;
}

long long binom(int n, int r) {
    long long v = 1;
    for (int i = 0; i < r; ++i) v = v * (n - i) / (i + 1);
    return v;
}

std::vector<long long> read_ints(std::istream& in) {
    std::vector<long long> vals;
    long long x;
    while (in >> x) vals.push_back(x);
    return vals;
}

}  // namespace

LinearCode code_from_generator(BitMatrix generator, std::string name) {
    LinearCode code;
    code.n = int(generator.cols());
    code.k = int(generator.rows());
    if (rank(generator) != code.k)
        throw std::invalid_argument("generator matrix is rank deficient");
    code.parity = null_space_basis(generator);
    code.generator = std::move(generator);
    code.name = std::move(name);
    return code;
}

LinearCode code_from_parity(const BitMatrix& parity, std::string name, std::string* warning) {
    const std::size_t n = parity.cols();
    RowReduceResult rr = row_reduce(parity);
    const int r = rr.rank;
    if (std::size_t(r) < parity.rows() && warning)
        *warning += "parity matrix is rank deficient (" + std::to_string(parity.rows()) +
                    " rows, rank " + std::to_string(r) + "); dimension adjusted to " +
                    std::to_string(n - std::size_t(r)) + "\n";
    BitMatrix h(std::size_t(r), n);
    for (std::size_t i = 0; i < std::size_t(r); ++i) h.set_row(i, rr.reduced.row_vec(i));

    LinearCode code;
    code.n = int(n);
    code.k = int(n) - r;
    code.parity = std::move(h);
    code.generator = null_space_basis(code.parity);
    code.name = std::move(name);
    return code;
}

LinearCode build_rm(int r, int m) {
    if (r < 0 || m < 0 || r > m || m > 10)
        throw std::invalid_argument("build_rm: need 0 <= r <= m <= 10");
    const int n = 1 << m;
    int k = 0;
    for (int i = 0; i <= r; ++i) k += int(binom(m, i));

    BitMatrix g{std::size_t(k), std::size_t(n)};
    // rows = monomial evaluation vectors, ordered by degree then subset value
    std::size_t row = 0;
    for (int deg = 0; deg <= r; ++deg) {
        for (int subset = 0; subset < n; ++subset) {
            if (__builtin_popcount(unsigned(subset)) != deg) continue;
            for (int x = 0; x < n; ++x)
                if ((x & subset) == subset) g.set(row, std::size_t(x), true);
            ++row;
        }
    }
    return code_from_generator(std::move(g), "rm_" + std::to_string(r) + "_" + std::to_string(m));
}

LinearCode build_ebch(int m, int designed_k) {
    if (m < 2 || m > 10) throw std::invalid_argument("build_ebch: need 2 <= m <= 10");
    const int n = (1 << m) - 1;
    if (designed_k <= 0 || designed_k > n)
        throw std::invalid_argument("build_ebch: dimension out of range");

    GF2m gf(m);
    std::vector<std::uint8_t> g{1};
    std::set<int> used;  // coset leaders already multiplied into g
    int k = n;
    int t = 0;
    // grow designed distance until the BCH dimension matches
    while (k > designed_k) {
        ++t;
        if (2 * t > n) break;
        for (int s = 2 * (t - 1) + 1; s <= 2 * t; ++s) {
            std::vector<int> coset = cyclotomic_coset(s, n);
            if (used.count(coset.front())) continue;
            used.insert(coset.front());
            g = poly_mul_gf2(g, minimal_poly(gf, coset));
            k = n - (int(g.size()) - 1);
        }
    }
    if (k != designed_k)
        throw std::invalid_argument("build_ebch: no BCH code of length " + std::to_string(n) +
                                    " with dimension " + std::to_string(designed_k));

    // cyclic generator matrix (shifts of g) plus an overall parity bit,
    // with coordinates labeled by field elements: cyclic position i sits at
    // column alpha^i and the parity bit at column 0 (the zero element), the
    // usual evaluation-point ordering for extended primitive codes
    BitMatrix gen(std::size_t(k), std::size_t(n + 1));
    for (int row = 0; row < k; ++row) {
        int w = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g[i]) {
                gen.set(std::size_t(row), std::size_t(gf.alpha_pow(row + int(i))), true);
                ++w;
            }
        gen.set(std::size_t(row), 0, w & 1);
    }
    return code_from_generator(std::move(gen), "ebch_" + std::to_string(n + 1) + "_" +
                                                   std::to_string(designed_k));
}

LinearCode load_alist(const std::string& path, std::string* warning) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open alist file: " + path);
    std::vector<long long> v = read_ints(in);
    std::size_t pos = 0;
    auto take = [&](const char* what) {
        if (pos >= v.size()) throw std::runtime_error(std::string("alist: truncated at ") + what);
        return v[pos++];
    };

    const long long n = take("n");
    const long long mrows = take("m");
    if (n <= 0 || mrows <= 0 || n > 1 << 20 || mrows > 1 << 20)
        throw std::runtime_error("alist: implausible dimensions");
    const long long cmax = take("max column degree");
    const long long rmax = take("max row degree");

    std::vector<long long> cdeg{}; cdeg.resize(std::size_t(n));
    std::vector<long long> rdeg{}; rdeg.resize(std::size_t(mrows));
    for (auto& d : cdeg) d = take("column degree");
    for (auto& d : rdeg) d = take("row degree");
    for (long long d : cdeg)
        if (d < 0 || d > cmax) throw std::runtime_error("alist: column degree out of range");
    for (long long d : rdeg)
        if (d < 0 || d > rmax) throw std::runtime_error("alist: row degree out of range");

    // adjacency lists come either padded to the max degree or exact length;
    // disambiguate by the remaining token count
    const std::size_t remaining = v.size() - pos;
    const std::size_t padded = std::size_t(n * cmax + mrows * rmax);
    const std::size_t exact =
        std::size_t(std::accumulate(cdeg.begin(), cdeg.end(), 0LL) +
                    std::accumulate(rdeg.begin(), rdeg.end(), 0LL));
    bool is_padded;
    if (remaining == padded)
        is_padded = true;
    else if (remaining == exact)
        is_padded = false;
    else
        throw std::runtime_error("alist: adjacency list token count mismatch");

    BitMatrix h{std::size_t(mrows), std::size_t(n)};
    for (long long c = 0; c < n; ++c) {
        const long long count = is_padded ? cmax : cdeg[std::size_t(c)];
        long long nonzero = 0;
        for (long long i = 0; i < count; ++i) {
            const long long r = take("column adjacency");
            if (r == 0) continue;  // padding
            if (r < 1 || r > mrows) throw std::runtime_error("alist: row index out of range");
            h.set(std::size_t(r - 1), std::size_t(c), true);
            ++nonzero;
        }
        if (nonzero != cdeg[std::size_t(c)])
            throw std::runtime_error("alist: column weight inconsistent with degree list");
    }
    for (long long r = 0; r < mrows; ++r) {
        const long long count = is_padded ? rmax : rdeg[std::size_t(r)];
        long long nonzero = 0;
        for (long long i = 0; i < count; ++i) {
            const long long c = take("row adjacency");
            if (c == 0) continue;
            if (c < 1 || c > n) throw std::runtime_error("alist: column index out of range");
            if (!h.get(std::size_t(r), std::size_t(c - 1)))
                throw std::runtime_error("alist: row list disagrees with column list");
            ++nonzero;
        }
        if (nonzero != rdeg[std::size_t(r)])
            throw std::runtime_error("alist: row weight inconsistent with degree list");
    }

    std::string stem = path;
    if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    return code_from_parity(h, "alist_" + stem, warning);
}

LinearCode load_genmat(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open generator file: " + path);
    long long n = 0, k = 0;
    if (!(in >> n >> k) || n <= 0 || k <= 0 || k > n)
        throw std::runtime_error("genmat: bad header, expected \"n k\"");
    BitMatrix g{std::size_t(k), std::size_t(n)};
    std::string line;
    std::getline(in, line);
    for (long long r = 0; r < k; ++r) {
        if (!std::getline(in, line)) throw std::runtime_error("genmat: missing row");
        std::size_t c = 0;
        for (char ch : line) {
            if (ch == '0' || ch == '1') {
                if (c >= std::size_t(n)) throw std::runtime_error("genmat: row too long");
                if (ch == '1') g.set(std::size_t(r), c, true);
                ++c;
            } else if (!std::isspace(static_cast<unsigned char>(ch))) {
                throw std::runtime_error("genmat: invalid character in row");
            }
        }
        if (c != std::size_t(n)) throw std::runtime_error("genmat: row too short");
    }
    std::string stem = path;
    if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
    return code_from_generator(std::move(g), "genmat_" + stem);
}

LinearCode parse_code_spec(const std::string& spec, std::string* warning) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("code spec must be rm:r,m | ebch:m,k | alist:path | genmat:path");
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    if (kind == "alist") return load_alist(arg, warning);
    if (kind == "genmat") return load_genmat(arg);
    const auto comma = arg.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("code spec " + kind + " needs two comma-separated integers");
    int a = 0, b = 0;
    try {
        a = std::stoi(arg.substr(0, comma));
        b = std::stoi(arg.substr(comma + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("code spec has non-integer parameters: " + spec);
    }
    if (kind == "rm") return build_rm(a, b);
    if (kind == "ebch") return build_ebch(a, b);
    throw std::invalid_argument("unknown code family: " + kind);
}

BitVec encode(const LinearCode& code, const BitVec& message) {
    if (int(message.size()) != code.k)
        throw std::invalid_argument("encode: message length != k");
    return code.generator.left_mul(message);
}

int min_distance_bruteforce(const LinearCode& code) {
    if (code.k > 20)
        throw std::invalid_argument("min_distance_bruteforce: k > 20 is refused");
    if (code.k == 0) return 0;
    // Gray-code walk over all messages, one row xor per step
    BitVec cw(std::size_t(code.n));
    std::size_t best = std::size_t(code.n) + 1;
    const std::uint64_t total = std::uint64_t(1) << code.k;
    std::uint64_t gray = 0;
    for (std::uint64_t i = 1; i < total; ++i) {
        const std::uint64_t next = i ^ (i >> 1);
        const int bit = __builtin_ctzll(gray ^ next);
        gray = next;
        const std::uint64_t* grow = code.generator.row(std::size_t(bit));
        for (std::size_t w = 0; w < code.generator.words_per_row(); ++w) cw.words()[w] ^= grow[w];
        best = std::min(best, cw.weight());
    }
    return int(best);
}

}  // namespace lcnes::gf2
