#pragma once

#include <bit>
#include <limits>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "product_trellis.hpp"

namespace tcnoma {

/// Samples y(n) observed by one user, plus the CSI the detector may use.
struct ReceivedFrame {
    std::vector<cplx> samples;
    cplx channel_gain{1.0, 0.0};
    double noise_var = 0.0;
};

/// Winning path of a Viterbi run. `states` has one more entry than the
/// per-step vectors; `cumulative[n]` is the path metric after step n.
struct ViterbiPath {
    std::vector<unsigned> branches;
    std::vector<unsigned> parallels;
    std::vector<unsigned> states;
    std::vector<double> cumulative;
    double metric = 0.0;
    std::size_t info_steps = 0;
};

/// Minimum-distance sequence detection over a terminated trellis.
///
/// Minimises sum_n |y(n) - label_scale * c(n)|^2 over every codeword that
/// starts in state 0, takes free branches for the information steps and the
/// forced tail (parallel index 0) for the last tail_length() steps.
/// Ties resolve to the lowest branch index, then the lowest parallel index,
/// then the lowest predecessor state.
inline ViterbiPath viterbi(const LabeledTrellis& lt, std::span<const cplx> samples,
                           cplx label_scale)
{
    const std::size_t total = samples.size();
    const std::size_t tail = lt.tail_length();
    if (total < tail)
        throw std::invalid_argument("viterbi: " + std::to_string(total) +
                                    " samples is shorter than the tail (" + std::to_string(tail) +
                                    ")");
    const std::size_t info = total - tail;
    const std::size_t ns = lt.num_states(), nb = lt.branches(), np = lt.parallel();
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<cplx> scaled(lt.labels().begin(), lt.labels().end());
    for (auto& l : scaled)
        l *= label_scale;

    struct Survivor {
        unsigned pred, branch, parallel;
    };
    std::vector<Survivor> surv(total * ns);
    std::vector<double> cur(ns, inf), nxt(ns);
    cur[0] = 0.0;

    for (std::size_t n = 0; n < total; ++n) {
        std::fill(nxt.begin(), nxt.end(), inf);
        Survivor* row = &surv[n * ns];
        const cplx y = samples[n];
        const bool tail_step = n >= info;
        const std::size_t remaining = total - n;
        for (unsigned s = 0; s < ns; ++s) {
            if (cur[s] == inf)
                continue;
            unsigned b_lo = 0, b_hi = unsigned(nb);
            if (tail_step) {
                const unsigned tb = lt.tail_branch(s, remaining);
                if (tb == unsigned(-1))
                    continue;
                b_lo = tb;
                b_hi = tb + 1;
            }
            for (unsigned b = b_lo; b < b_hi; ++b) {
                const cplx* lab = &scaled[(s * nb + b) * np];
                double bm = std::norm(y - lab[0]);
                unsigned bp = 0;
                if (!tail_step)
                    for (unsigned p = 1; p < np; ++p) {
                        const double d = std::norm(y - lab[p]);
                        if (d < bm) {
                            bm = d;
                            bp = p;
                        }
                    }
                const double cand = cur[s] + bm;
                const unsigned to = lt.next_state(s, b);
                if (cand < nxt[to] ||
                    (cand == nxt[to] && std::tie(b, bp, s) < std::tie(row[to].branch,
                                                                      row[to].parallel,
                                                                      row[to].pred))) {
                    nxt[to] = cand;
                    row[to] = {s, b, bp};
                }
            }
        }
        std::swap(cur, nxt);
    }
    if (cur[0] == inf)
        throw std::invalid_argument("viterbi: no terminated path");

    ViterbiPath path;
    path.metric = cur[0];
    path.info_steps = info;
    path.branches.resize(total);
    path.parallels.resize(total);
    path.states.resize(total + 1);
    path.cumulative.resize(total);
    unsigned s = 0;
    path.states[total] = 0;
    for (std::size_t n = total; n-- > 0;) {
        const Survivor& sv = surv[n * ns + s];
        path.branches[n] = sv.branch;
        path.parallels[n] = sv.parallel;
        s = sv.pred;
        path.states[n] = s;
    }
    double acc = 0.0;
    for (std::size_t n = 0; n < total; ++n) {
        const std::size_t at = (path.states[n] * nb + path.branches[n]) * np + path.parallels[n];
        acc += std::norm(samples[n] - scaled[at]);
        path.cumulative[n] = acc;
    }
    return path;
}

/// A user's TCM code: trellis, constellation and the decoding view with the
/// tail length the transmitter uses.
struct TcmCode {
    Trellis trellis;
    Constellation constellation;
    LabeledTrellis labeled;

    TcmCode(Trellis t, Constellation c, std::optional<std::size_t> tail = std::nullopt)
        : trellis(std::move(t)), constellation(std::move(c)),
          labeled(label_trellis(trellis, constellation, tail))
    {
    }

    std::size_t tail_length() const { return labeled.tail_length(); }
    Codeword encode(const InfoFrame& f) const
    {
        return tcnoma::encode(trellis, f, constellation, tail_length());
    }
};

struct DetectionResult {
    Bits bits_user1;
    Bits bits_user2;
    double path_metric = 0.0;
    std::vector<unsigned> decoded_path;
};

inline Bits path_bits(const Trellis& t, const ViterbiPath& path)
{
    Bits out;
    out.reserve(path.info_steps * t.bits_per_step());
    for (std::size_t n = 0; n < path.info_steps; ++n)
        append_step_bits(t, path.branches[n], path.parallels[n], out);
    return out;
}

/// Single-trellis detection; the decoded bits are returned in `bits_user1`
/// when `user` is 1 and in `bits_user2` otherwise.
inline DetectionResult viterbi_detect(const TcmCode& code, const ReceivedFrame& rx,
                                      cplx label_scale, int user = 1)
{
    ViterbiPath path = viterbi(code.labeled, rx.samples, label_scale);
    DetectionResult r;
    (user == 1 ? r.bits_user1 : r.bits_user2) = path_bits(code.trellis, path);
    r.path_metric = path.metric;
    r.decoded_path = std::move(path.states);
    return r;
}

/// Joint detection of both users on the product trellis.
inline DetectionResult joint_detect(const ProductTrellis& pt, const ReceivedFrame& rx)
{
    ViterbiPath path = viterbi(pt.labeled(), rx.samples, rx.channel_gain);
    DetectionResult r;
    r.bits_user1.reserve(path.info_steps * pt.first().bits_per_step());
    r.bits_user2.reserve(path.info_steps * pt.second().bits_per_step());
    for (std::size_t n = 0; n < path.info_steps; ++n) {
        const LabelOrigin o = pt.origin(path.branches[n], path.parallels[n]);
        append_step_bits(pt.first(), o.branch1, o.parallel1, r.bits_user1);
        append_step_bits(pt.second(), o.branch2, o.parallel2, r.bits_user2);
    }
    r.path_metric = path.metric;
    r.decoded_path = std::move(path.states);
    return r;
}

/// y(n) - h*sqrt(P2)*a2(n) for the re-encoded User 2 bits.
inline std::vector<cplx> sic_cancel(const TcmCode& code2, const ReceivedFrame& rx,
                                    const PowerPair& powers, const Bits& bits2)
{
    const std::size_t steps = rx.samples.size() - code2.tail_length();
    const Codeword cw = code2.encode(InfoFrame(bits2, steps));
    const cplx scale = rx.channel_gain * std::sqrt(powers.p2);
    std::vector<cplx> residual(rx.samples.size());
    for (std::size_t n = 0; n < residual.size(); ++n)
        residual[n] = rx.samples[n] - scale * cw.symbols[n];
    return residual;
}

/// Successive interference cancellation at User 1: detect User 2 treating
/// User 1 as noise, cancel it, then detect User 1. `bits_user2` carries the
/// stage-1 estimate.
inline DetectionResult sic_detect_user1(const TcmCode& code1, const TcmCode& code2,
                                        const ReceivedFrame& rx, const PowerPair& powers)
{
    const cplx h = rx.channel_gain;
    ViterbiPath stage1 = viterbi(code2.labeled, rx.samples, h * std::sqrt(powers.p2));
    DetectionResult r;
    r.bits_user2 = path_bits(code2.trellis, stage1);
    const std::vector<cplx> residual = sic_cancel(code2, rx, powers, r.bits_user2);
    ViterbiPath stage3 = viterbi(code1.labeled, residual, h * std::sqrt(powers.p1));
    r.bits_user1 = path_bits(code1.trellis, stage3);
    r.path_metric = stage3.metric;
    r.decoded_path = std::move(stage3.states);
    return r;
}

/// User 2 detects its own signal with User 1's signal left as interference.
inline DetectionResult detect_user2_direct(const TcmCode& code2, const ReceivedFrame& rx,
                                           const PowerPair& powers)
{
    return viterbi_detect(code2, rx, rx.channel_gain * std::sqrt(powers.p2), 2);
}

/// Per-symbol ML over the |c1|*|c2| superimposed points. Constellation
/// indices are the bit labels (MSB first); ties go to the lowest (u, v).
inline DetectionResult uncoded_ml_detect(const ReceivedFrame& rx, const PowerPair& powers,
                                         const Constellation& c1, const Constellation& c2)
{
    if (!std::has_single_bit(c1.size()) || !std::has_single_bit(c2.size()))
        throw std::invalid_argument("uncoded detection: constellation sizes must be powers of two");
    const unsigned w1 = unsigned(std::countr_zero(c1.size()));
    const unsigned w2 = unsigned(std::countr_zero(c2.size()));
    std::vector<cplx> grid;
    grid.reserve(c1.size() * c2.size());
    const double a1 = std::sqrt(powers.p1), a2 = std::sqrt(powers.p2);
    for (std::size_t u = 0; u < c1.size(); ++u)
        for (std::size_t v = 0; v < c2.size(); ++v)
            grid.push_back(rx.channel_gain * (a1 * c1[u] + a2 * c2[v]));

    DetectionResult r;
    r.bits_user1.reserve(rx.samples.size() * w1);
    r.bits_user2.reserve(rx.samples.size() * w2);
    for (const cplx& y : rx.samples) {
        std::size_t best = 0;
        double bd = std::norm(y - grid[0]);
        for (std::size_t k = 1; k < grid.size(); ++k) {
            const double d = std::norm(y - grid[k]);
            if (d < bd) {
                bd = d;
                best = k;
            }
        }
        r.path_metric += bd;
        const std::size_t u = best / c2.size(), v = best % c2.size();
        for (unsigned i = w1; i-- > 0;)
            r.bits_user1.push_back(std::uint8_t((u >> i) & 1u));
        for (unsigned i = w2; i-- > 0;)
            r.bits_user2.push_back(std::uint8_t((v >> i) & 1u));
        r.decoded_path.push_back(unsigned(best));
    }
    return r;
}

} // namespace tcnoma
