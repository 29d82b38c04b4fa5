#include "channel.hpp"

#include <cmath>
#include <stdexcept>

namespace lcnes::channel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

double ebn0_to_sigma2(double ebn0_db, double rate) {
    if (!(rate > 0.0) || rate > 1.0)
        throw std::invalid_argument("ebn0_to_sigma2: rate must be in (0,1]");
    return 1.0 / (2.0 * rate * std::pow(10.0, ebn0_db / 10.0));
}

FrameRng FrameRng::for_frame(std::uint64_t seed, std::uint64_t snr_index,
                             std::uint64_t frame_index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (0x9E3779B97F4A7C15ull * (snr_index + 1)));
    h = splitmix64(h ^ (0xBF58476D1CE4E5B9ull * (frame_index + 1)));
    return FrameRng(h);
}

double FrameRng::next_gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * next_unit() - 1.0;
        v = 2.0 * next_unit() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

gf2::BitVec FrameRng::random_bits(std::size_t n) {
    gf2::BitVec v(n);
    for (std::size_t w = 0; w < v.word_count(); ++w) v.words()[w] = eng_();
    // keep the padding canonical
    if (n % gf2::kWordBits)
        v.words()[v.word_count() - 1] &= (std::uint64_t(1) << (n % gf2::kWordBits)) - 1;
    return v;
}

std::uint64_t FrameRng::next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                (std::numeric_limits<std::uint64_t>::max() % bound);
    std::uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return x % bound;
}

ReceivedFrame transmit(const gf2::BitVec& codeword, double sigma2, FrameRng& rng) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("transmit: sigma2 must be positive");
    const std::size_t n = codeword.size();
    ReceivedFrame f;
    f.sigma2 = sigma2;
    f.y.resize(n);
    f.llr.resize(n);
    f.z.resize(n);
    const double sigma = std::sqrt(sigma2);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = codeword.get(i) ? -1.0 : 1.0;  // x = 1 - 2c
        f.y[i] = x + sigma * rng.next_gaussian();
        f.llr[i] = 2.0 * f.y[i] / sigma2;
        f.z.set(i, f.y[i] < 0.0);
        s += std::abs(f.llr[i]);
    }
    f.total_soft_weight = s;
    f.mean_reliability = n ? s / double(n) : 0.0;
    return f;
}

double soft_weight(std::span<const double> llr, const gf2::BitVec& candidate,
                   const gf2::BitVec& z) {
    if (llr.size() != candidate.size() || llr.size() != z.size())
        throw std::invalid_argument("soft_weight: length mismatch");
    double g = 0.0;
    for (std::size_t i = 0; i < llr.size(); ++i)
        if (candidate.get(i) != z.get(i)) g += std::abs(llr[i]);
    return g;
}

}  // namespace lcnes::channel
