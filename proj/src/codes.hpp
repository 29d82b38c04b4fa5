#pragma once

#include <string>

#include "gf2.hpp"

namespace lcnes::gf2 {

struct LinearCode {
    int n = 0;
    int k = 0;
    BitMatrix generator;  // k x n
    BitMatrix parity;     // (n-k) x n
    std::string name;

    double rate() const { return n > 0 ? double(k) / double(n) : 0.0; }
};

// Builds a code around a full-rank generator; parity is derived as a null
// space basis so G*H^T = 0 holds by construction.
LinearCode code_from_generator(BitMatrix generator, std::string name);

// Builds a code from a parity-check matrix. Dependent parity rows are dropped
// (k becomes n - rank) and a note is appended to *warning when given.
LinearCode code_from_parity(const BitMatrix& parity, std::string name,
                            std::string* warning = nullptr);

// Reed-Muller RM(r,m): n = 2^m, generator rows are evaluations of monomials
// of degree <= r. Requires 0 <= r <= m <= 10.
LinearCode build_rm(int r, int m);

// Extended narrow-sense binary BCH of length 2^m with the given dimension,
// built from GF(2^m) cyclotomic cosets plus an overall parity bit.
// Requires 2 <= m <= 10 and that a BCH code of that dimension exists.
LinearCode build_ebch(int m, int designed_k);

// Standard alist text format for sparse parity-check matrices.
LinearCode load_alist(const std::string& path, std::string* warning = nullptr);

// Plain-text generator: first line "n k", then k lines of n chars in {0,1}.
LinearCode load_genmat(const std::string& path);

// "rm:r,m" | "ebch:m,k" | "alist:path" | "genmat:path"
LinearCode parse_code_spec(const std::string& spec, std::string* warning = nullptr);

BitVec encode(const LinearCode& code, const BitVec& message);

// Exhaustive minimum distance; refuses k > 20.
int min_distance_bruteforce(const LinearCode& code);

}  // namespace lcnes::gf2
