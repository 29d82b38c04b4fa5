#include "lcosd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lcnes::lcosd {

namespace {

std::vector<int> reliability_order(const std::vector<double>& llr) {
    std::vector<int> order(llr.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(llr[std::size_t(a)]) > std::abs(llr[std::size_t(b)]);
    });
    return order;
}

}  // namespace

LcosdContext preprocess(const gf2::LinearCode& code, const channel::ReceivedFrame& frame,
                        int delta) {
    const int n = code.n, k = code.k;
    if (int(frame.llr.size()) != n) throw std::invalid_argument("preprocess: frame length != n");
    if (delta < 0 || delta > n - k) throw std::invalid_argument("preprocess: delta out of range");
    if (delta > 16) throw std::invalid_argument("preprocess: delta > 16 unsupported (2^delta trellis states)");
    if (k + delta > 128) throw std::invalid_argument("preprocess: k + delta > 128 unsupported");

    LcosdContext ctx;
    ctx.code = &code;
    ctx.n = n;
    ctx.k = k;
    ctx.delta = delta;
    ctx.perm = reliability_order(frame.llr);
    ctx.sorted_abs_llr.resize(std::size_t(n));
    for (int i = 0; i < n; ++i)
        ctx.sorted_abs_llr[std::size_t(i)] = std::abs(frame.llr[std::size_t(ctx.perm[std::size_t(i)])]);

    // L must be independent in H; pick it greedily from the least reliable
    // side so R keeps the most reliable k+delta positions possible.
    std::vector<int> increasing(ctx.perm.rbegin(), ctx.perm.rend());
    gf2::RowReduceResult up = gf2::row_reduce(code.parity, increasing);
    if (up.rank != n - k) throw std::logic_error("preprocess: parity matrix is rank deficient");

    const std::size_t lsz = ctx.l_size();
    std::vector<char> in_l(std::size_t(n), 0);
    for (std::size_t i = 0; i < lsz; ++i) in_l[std::size_t(up.pivot_cols[i])] = 1;
    for (int idx : ctx.perm)
        (in_l[std::size_t(idx)] ? ctx.set_L : ctx.set_R).push_back(idx);
    ctx.arranged = ctx.set_L;
    ctx.arranged.insert(ctx.arranged.end(), ctx.set_R.begin(), ctx.set_R.end());

    gf2::BitMatrix h_arr = code.parity.select_columns(ctx.arranged);
    gf2::RowReduceResult rr = gf2::row_reduce(h_arr);
    for (std::size_t i = 0; i < lsz; ++i)
        if (rr.pivot_cols[i] != int(i)) throw std::logic_error("preprocess: L block is not an identity");

    const std::size_t rsz = ctx.r_size();
    ctx.p1 = gf2::BitMatrix(lsz, rsz);
    ctx.p2 = gf2::BitMatrix(std::size_t(delta), rsz);
    for (std::size_t r = 0; r < lsz; ++r)
        for (std::size_t c = 0; c < rsz; ++c)
            if (rr.reduced.get(r, lsz + c)) ctx.p1.set(r, c, true);
    for (std::size_t r = 0; r < std::size_t(delta); ++r)
        for (std::size_t c = 0; c < rsz; ++c)
            if (rr.reduced.get(lsz + r, lsz + c)) ctx.p2.set(r, c, true);
    ctx.p1t = ctx.p1.transposed();

    ctx.weights_L.resize(lsz);
    ctx.weights_R.resize(rsz);
    ctx.z_l.resize(lsz);
    ctx.z_r.resize(rsz);
    for (std::size_t i = 0; i < lsz; ++i) {
        const std::size_t orig = std::size_t(ctx.set_L[i]);
        ctx.weights_L[i] = std::abs(frame.llr[orig]);
        ctx.z_l.set(i, frame.z.get(orig));
    }
    for (std::size_t i = 0; i < rsz; ++i) {
        const std::size_t orig = std::size_t(ctx.set_R[i]);
        ctx.weights_R[i] = std::abs(frame.llr[orig]);
        ctx.z_r.set(i, frame.z.get(orig));
    }

    gf2::BitVec syndrome = ctx.p2.times_vec(ctx.z_r);
    ctx.target_syndrome = 0;
    for (int j = 0; j < delta; ++j)
        if (syndrome.get(std::size_t(j))) ctx.target_syndrome |= std::uint32_t(1) << j;

    ctx.p2_cols.assign(rsz, 0);
    for (std::size_t c = 0; c < rsz; ++c)
        for (int j = 0; j < delta; ++j)
            if (ctx.p2.get(std::size_t(j), c)) ctx.p2_cols[c] |= std::uint32_t(1) << j;

    ctx.base_l_diff = ctx.p1t.left_mul(ctx.z_r);
    ctx.base_l_diff ^= ctx.z_l;
    return ctx;
}

TepStream::TepStream(const LcosdContext& ctx) : ctx_(&ctx) {
    m_ = std::uint32_t(ctx.r_size());
    nstates_ = std::uint32_t(1) << ctx.delta;
    diff_words_.resize(gf2::words_for(ctx.l_size()));

    // exact minimal cost from (stage, state) to (m, target)
    suffix_.assign(std::size_t(m_ + 1) * nstates_, kInf);
    suffix_[std::size_t(m_) * nstates_ + ctx.target_syndrome] = 0.0;
    for (std::uint32_t s = m_; s-- > 0;) {
        const double w = ctx.weights_R[s];
        const std::uint32_t col = ctx.p2_cols[s];
        const double* nxt = suffix_.data() + std::size_t(s + 1) * nstates_;
        double* cur = suffix_.data() + std::size_t(s) * nstates_;
        for (std::uint32_t st = 0; st < nstates_; ++st)
            cur[st] = std::min(nxt[st], w + nxt[st ^ col]);
    }
    root_ = Node{suffix_at(0, 0), 0.0, 0, 0, 0, 0};
    heap_.reserve(1024);
}

void TepStream::push(const Node& nd) {
    heap_.push_back(nd);
    std::push_heap(heap_.begin(), heap_.end(), PopsLater{});
}

void TepStream::walk_and_emit(Node cur, TepEvent& ev) {
    const LcosdContext& ctx = *ctx_;
    while (cur.stage < m_) {
        const std::uint32_t s = cur.stage;
        const double w = ctx.weights_R[s];
        const std::uint32_t st1 = cur.state ^ ctx.p2_cols[s];
        const double f0 = cur.g + suffix_at(s + 1, cur.state);
        const double g1 = cur.g + w;
        const double f1 = g1 + suffix_at(s + 1, st1);
        std::uint64_t set_hi = 0, set_lo = 0;
        if (s < 64) set_hi = std::uint64_t(1) << (63 - s); else set_lo = std::uint64_t(1) << (127 - s);
        if (f0 <= f1) {  // tie keeps the lexicographically smaller branch
            if (f1 < kInf)
                push(Node{f1, g1, cur.bits_hi | set_hi, cur.bits_lo | set_lo, s + 1, st1});
            cur.f = f0;
            cur.stage = s + 1;
        } else {
            if (f0 < kInf) push(Node{f0, cur.g, cur.bits_hi, cur.bits_lo, s + 1, cur.state});
            cur.f = f1;
            cur.g = g1;
            cur.state = st1;
            cur.bits_hi |= set_hi;
            cur.bits_lo |= set_lo;
            cur.stage = s + 1;
        }
    }

    ev.t = ++emitted_;
    ev.gamma_r = cur.g;
    ev.e_r.resize(m_);
    std::uint64_t w = cur.bits_hi;
    while (w) {
        ev.e_r.set(63 - std::size_t(__builtin_ctzll(w)), true);
        w &= w - 1;
    }
    w = cur.bits_lo;
    while (w) {
        ev.e_r.set(127 - std::size_t(__builtin_ctzll(w)), true);
        w &= w - 1;
    }

    // full metric: gamma_r plus the weighted disagreements on L
    std::copy(ctx.base_l_diff.words(), ctx.base_l_diff.words() + diff_words_.size(),
              diff_words_.begin());
    ev.e_r.for_each_set([&](std::size_t r) {
        const std::uint64_t* row = ctx.p1t.row(r);
        for (std::size_t i = 0; i < diff_words_.size(); ++i) diff_words_[i] ^= row[i];
    });
    double gl = 0.0;
    for (std::size_t wi = 0; wi < diff_words_.size(); ++wi) {
        std::uint64_t d = diff_words_[wi];
        while (d) {
            gl += ctx.weights_L[wi * 64 + std::size_t(__builtin_ctzll(d))];
            d &= d - 1;
        }
    }
    ev.gamma = cur.g + gl;
}

bool TepStream::next(TepEvent& ev) {
    Node cur;
    if (root_pending_) {
        root_pending_ = false;
        if (root_.f == kInf) return false;
        cur = root_;
    } else {
        if (heap_.empty()) return false;
        std::pop_heap(heap_.begin(), heap_.end(), PopsLater{});
        cur = heap_.back();
        heap_.pop_back();
    }
    walk_and_emit(cur, ev);
    return true;
}

bool TepStream::peek_next_gamma_r(double* out) const {
    if (root_pending_) {
        if (root_.f == kInf) return false;
        *out = root_.f;
        return true;
    }
    if (heap_.empty()) return false;
    *out = heap_.front().f;
    return true;
}

gf2::BitVec reconstruct(const LcosdContext& ctx, const gf2::BitVec& e_r) {
    if (e_r.size() != ctx.r_size()) throw std::invalid_argument("reconstruct: e_r length mismatch");
    gf2::BitVec syndrome = ctx.p2.times_vec(e_r);
    std::uint32_t packed = 0;
    for (int j = 0; j < ctx.delta; ++j)
        if (syndrome.get(std::size_t(j))) packed |= std::uint32_t(1) << j;
    if (packed != ctx.target_syndrome)
        throw std::invalid_argument("reconstruct: inadmissible test error pattern");

    gf2::BitVec c_r = ctx.z_r;
    c_r ^= e_r;
    gf2::BitVec c_l = ctx.p1t.left_mul(c_r);
    gf2::BitVec out(std::size_t(ctx.n));
    for (std::size_t i = 0; i < ctx.l_size(); ++i)
        out.set(std::size_t(ctx.arranged[i]), c_l.get(i));
    for (std::size_t i = 0; i < ctx.r_size(); ++i)
        out.set(std::size_t(ctx.arranged[ctx.l_size() + i]), c_r.get(i));
    return out;
}

gf2::BitVec transmitted_e_r(const LcosdContext& ctx, const gf2::BitVec& transmitted) {
    gf2::BitVec e(ctx.r_size());
    for (std::size_t i = 0; i < ctx.r_size(); ++i)
        e.set(i, transmitted.get(std::size_t(ctx.arranged[ctx.l_size() + i])) != ctx.z_r.get(i));
    return e;
}

SearchState decode_full(const LcosdContext& ctx, std::uint64_t t_max, Trace* trace,
                        const gf2::BitVec* transmitted) {
    if (t_max < 1) throw std::invalid_argument("decode_full: t_max must be >= 1");
    TepStream stream(ctx);
    SearchState st;
    gf2::BitVec e_star;
    if (transmitted) e_star = transmitted_e_r(ctx, *transmitted);
    bool best_correct = false;

    TepEvent ev;
    for (std::uint64_t t = 1; t <= t_max; ++t) {
        if (!stream.next(ev)) {
            st.exhausted = true;
            break;
        }
        const bool improved = ev.gamma < st.best_gamma;
        if (improved) {
            st.best_gamma = ev.gamma;
            st.best_e_r = ev.e_r;
            st.last_improve_t = t;
            if (transmitted) best_correct = (ev.e_r == e_star);
        }
        st.teps = t;
        if (trace) trace->push_back({ev.gamma_r, ev.gamma, improved, best_correct});
    }
    if (st.teps == 0) throw std::logic_error("decode_full: no admissible TEP was emitted");
    st.best_candidate = reconstruct(ctx, st.best_e_r);
    return st;
}

SearchState decode_optimal_stop(const LcosdContext& ctx, std::uint64_t t_max) {
    if (t_max < 1) throw std::invalid_argument("decode_optimal_stop: t_max must be >= 1");
    TepStream stream(ctx);
    SearchState st;
    TepEvent ev;
    for (std::uint64_t t = 1; t <= t_max; ++t) {
        if (!stream.next(ev)) {
            st.exhausted = true;
            break;
        }
        if (ev.gamma < st.best_gamma) {
            st.best_gamma = ev.gamma;
            st.best_e_r = ev.e_r;
            st.last_improve_t = t;
        }
        st.teps = t;
        double nxt;
        if (!stream.peek_next_gamma_r(&nxt)) {
            st.exhausted = true;
            break;
        }
        if (nxt >= st.best_gamma) break;  // gamma >= gamma_r, nothing ahead can win
    }
    if (st.teps == 0) throw std::logic_error("decode_optimal_stop: no admissible TEP was emitted");
    st.best_candidate = reconstruct(ctx, st.best_e_r);
    return st;
}

gf2::BitVec decode_osd_reference(const gf2::LinearCode& code, const channel::ReceivedFrame& frame,
                                 int order, std::uint64_t enumeration_cap) {
    const int n = code.n, k = code.k;
    if (order < 0 || order > k) throw std::invalid_argument("osd: order out of range");
    std::uint64_t total = 0;
    {
        long double c = 1;
        for (int i = 0; i <= order; ++i) {
            total += std::uint64_t(c);
            c = c * (k - i) / (i + 1);
        }
    }
    if (total > enumeration_cap)
        throw std::invalid_argument("osd: enumeration size exceeds the configured cap");

    std::vector<int> order_desc = reliability_order(frame.llr);
    gf2::RowReduceResult rr = gf2::row_reduce(code.generator, order_desc);
    if (rr.rank != k) throw std::logic_error("osd: generator is rank deficient");

    // arranged columns: MRB (pivot order) then the rest by reliability
    std::vector<int> arranged = rr.pivot_cols;
    std::vector<char> is_pivot(std::size_t(n), 0);
    for (int c : rr.pivot_cols) is_pivot[std::size_t(c)] = 1;
    for (int idx : order_desc)
        if (!is_pivot[std::size_t(idx)]) arranged.push_back(idx);
    gf2::BitMatrix sys = rr.reduced.select_columns(arranged);  // [I_k | P]

    gf2::BitVec u0{std::size_t(k)};
    for (int i = 0; i < k; ++i) u0.set(std::size_t(i), frame.z.get(std::size_t(arranged[std::size_t(i)])));

    gf2::BitVec best;
    double best_gamma = kInf;
    auto consider = [&](const gf2::BitVec& u) {
        gf2::BitVec arr = sys.left_mul(u);
        gf2::BitVec cand{std::size_t(n)};
        for (int i = 0; i < n; ++i) cand.set(std::size_t(arranged[std::size_t(i)]), arr.get(std::size_t(i)));
        const double g = channel::soft_weight(frame.llr, cand, frame.z);
        if (g < best_gamma) {
            best_gamma = g;
            best = cand;
        }
    };

    consider(u0);
    std::vector<int> pos;
    for (int w = 1; w <= order; ++w) {
        pos.resize(std::size_t(w));
        std::iota(pos.begin(), pos.end(), 0);
        while (true) {
            gf2::BitVec u = u0;
            for (int p : pos) u.flip(std::size_t(p));
            consider(u);
            int i = w - 1;
            while (i >= 0 && pos[std::size_t(i)] == k - w + i) --i;
            if (i < 0) break;
            ++pos[std::size_t(i)];
            for (int j = i + 1; j < w; ++j) pos[std::size_t(j)] = pos[std::size_t(j - 1)] + 1;
        }
    }
    return best;
}

}  // namespace lcnes::lcosd
