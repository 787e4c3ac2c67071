#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "product_trellis.hpp"

namespace tcnoma {

// Closed-form squared distances of the 4-state 8-PSK code superimposed with
// itself. All inputs are PowerPair values, so negative powers never get here.

/// min{2sqrt(P2) - 2sqrt(P1), 2sqrt(P1)}^2
inline double d_parallel_sq(const PowerPair& pw)
{
    const double d1 = 2.0 * std::sqrt(pw.p2) - 2.0 * std::sqrt(pw.p1);
    const double d2 = 2.0 * std::sqrt(pw.p1);
    const double d = std::min(d1, d2);
    return d * d;
}

/// First (and, by symmetry, last) step of the shortest diverge-merge event:
/// |sqrt(2P2) - 2sqrt(P1)|^2.
inline double d_diverge_sq(const PowerPair& pw)
{
    const double d = std::sqrt(2.0 * pw.p2) - 2.0 * std::sqrt(pw.p1);
    return d * d;
}

/// Middle step: (2 - sqrt2)P2 + min{0, 4P1 + 2sqrt(P1P2)(sqrt2 - 2)}.
inline double d_mid_sq(const PowerPair& pw)
{
    const double r2 = std::sqrt(2.0);
    return (2.0 - r2) * pw.p2 + std::min(0.0, 4.0 * pw.p1 + 2.0 * std::sqrt(pw.p1 * pw.p2) * (r2 - 2.0));
}

inline double d_dm_sq(const PowerPair& pw)
{
    return 2.0 * d_diverge_sq(pw) + d_mid_sq(pw);
}

enum class EventKind { None, Parallel, DivergeMerge };

inline std::string_view to_string(EventKind k)
{
    switch (k) {
    case EventKind::Parallel: return "parallel";
    case EventKind::DivergeMerge: return "diverge-merge";
    default: return "none";
    }
}

struct DistanceReport {
    double d_parallel_sq = 0.0;
    double d_dm_sq = 0.0;
    double d_free_sq = 0.0;
    EventKind argmin_event = EventKind::None;
};

inline DistanceReport d_free_sq(const PowerPair& pw)
{
    DistanceReport r;
    r.d_parallel_sq = tcnoma::d_parallel_sq(pw);
    r.d_dm_sq = tcnoma::d_dm_sq(pw);
    const bool par = r.d_parallel_sq <= r.d_dm_sq;
    r.d_free_sq = par ? r.d_parallel_sq : r.d_dm_sq;
    r.argmin_event = par ? EventKind::Parallel : EventKind::DivergeMerge;
    return r;
}

/// A pair of paths leaving `start_state` on different branches and meeting
/// again after length() steps (length 1 for a parallel-transition pair,
/// where both paths use the same branch).
struct ErrorEvent {
    EventKind kind = EventKind::None;
    double distance_sq = std::numeric_limits<double>::infinity();
    unsigned start_state = 0;
    std::vector<unsigned> branches_a, branches_b;
    std::vector<unsigned> states_a, states_b; // length()+1 entries each

    std::size_t length() const { return branches_a.size(); }
};

struct SearchReport {
    std::optional<ErrorEvent> parallel;
    std::optional<ErrorEvent> diverge_merge;

    bool found() const { return parallel || diverge_merge; }
    /// Minimum over both event families; nullopt when no event was found.
    std::optional<double> d_free_sq() const
    {
        if (!found())
            return std::nullopt;
        const double a = parallel ? parallel->distance_sq : std::numeric_limits<double>::infinity();
        const double b =
            diverge_merge ? diverge_merge->distance_sq : std::numeric_limits<double>::infinity();
        return std::min(a, b);
    }
    EventKind kind() const
    {
        if (!found())
            return EventKind::None;
        if (!diverge_merge)
            return EventKind::Parallel;
        if (!parallel)
            return EventKind::DivergeMerge;
        return parallel->distance_sq <= diverge_merge->distance_sq ? EventKind::Parallel
                                                                   : EventKind::DivergeMerge;
    }
};

namespace detail {

inline double min_label_gap(const LabeledTrellis& lt, unsigned sa, unsigned ba, unsigned sc,
                            unsigned bc)
{
    double best = std::numeric_limits<double>::infinity();
    for (unsigned p = 0; p < lt.parallel(); ++p)
        for (unsigned q = 0; q < lt.parallel(); ++q)
            best = std::min(best, std::norm(lt.label(sa, ba, p) - lt.label(sc, bc, q)));
    return best;
}

} // namespace detail

/// Squared distance of a specific pair of branch sequences from `start`,
/// taking the closest parallel labels at every step.
inline double event_distance_sq(const LabeledTrellis& lt, unsigned start,
                                std::span<const unsigned> branches_a,
                                std::span<const unsigned> branches_b)
{
    if (branches_a.size() != branches_b.size())
        throw std::invalid_argument("event_distance_sq: path lengths differ");
    unsigned a = start, c = start;
    double total = 0.0;
    for (std::size_t k = 0; k < branches_a.size(); ++k) {
        total += detail::min_label_gap(lt, a, branches_a[k], c, branches_b[k]);
        a = lt.next_state(a, branches_a[k]);
        c = lt.next_state(c, branches_b[k]);
    }
    return total;
}

/// Exhaustive free-distance search.
///
/// Parallel events: closest pair of distinct labels on a common branch.
/// Diverge-merge events: shortest path on the graph of ordered state pairs,
/// entered from a diagonal pair (s, s) through two different branches and
/// left on the first return to the diagonal, within `max_len` steps. Edge
/// weights are the closest label pair of the two branches.
inline SearchReport d_free_search(const LabeledTrellis& lt, std::size_t max_len = 12,
                                  std::optional<unsigned> start_state = std::nullopt)
{
    if (max_len < 1)
        throw std::invalid_argument("d_free_search: max_len must be positive");
    const std::size_t ns = lt.num_states(), nb = lt.branches(), np = lt.parallel();
    constexpr double inf = std::numeric_limits<double>::infinity();
    SearchReport rep;

    const unsigned s_lo = start_state ? *start_state : 0;
    const unsigned s_hi = start_state ? *start_state + 1 : unsigned(ns);
    if (s_hi > ns)
        throw std::invalid_argument("d_free_search: start state out of range");

    for (unsigned s = s_lo; s < s_hi; ++s)
        for (unsigned b = 0; b < nb; ++b)
            for (unsigned p = 0; p < np; ++p)
                for (unsigned q = p + 1; q < np; ++q) {
                    const double d = std::norm(lt.label(s, b, p) - lt.label(s, b, q));
                    if (!rep.parallel || d < rep.parallel->distance_sq) {
                        const unsigned n = lt.next_state(s, b);
                        rep.parallel = ErrorEvent{EventKind::Parallel, d, s, {b}, {b}, {s, n}, {s, n}};
                    }
                }

    // Pair-edge weights, indexed [(a*nb + ba) * ns*nb + c*nb + bc].
    const std::size_t se = ns * nb;
    std::vector<double> w(se * se);
    for (unsigned a = 0; a < ns; ++a)
        for (unsigned ba = 0; ba < nb; ++ba)
            for (unsigned c = 0; c < ns; ++c)
                for (unsigned bc = 0; bc < nb; ++bc)
                    w[(a * nb + ba) * se + c * nb + bc] = detail::min_label_gap(lt, a, ba, c, bc);

    struct Back {
        unsigned node, ba, bc;
    };
    const std::size_t nn = ns * ns;
    std::vector<std::vector<double>> dist(max_len + 1, std::vector<double>(nn, inf));
    std::vector<std::vector<Back>> back(max_len + 1, std::vector<Back>(nn));
    double best = inf;
    std::size_t best_len = 0;
    Back best_back{};

    // Layer 1: divergence from a diagonal pair.
    for (unsigned s = s_lo; s < s_hi; ++s)
        for (unsigned ba = 0; ba < nb; ++ba)
            for (unsigned bc = 0; bc < nb; ++bc) {
                if (ba == bc)
                    continue;
                const double d = w[(s * nb + ba) * se + s * nb + bc];
                const unsigned na = lt.next_state(s, ba), nc = lt.next_state(s, bc);
                const Back bk{unsigned(s * ns + s), ba, bc};
                if (na == nc) {
                    if (d < best) {
                        best = d;
                        best_len = 1;
                        best_back = bk;
                    }
                } else if (d < dist[1][na * ns + nc]) {
                    dist[1][na * ns + nc] = d;
                    back[1][na * ns + nc] = bk;
                }
            }

    for (std::size_t k = 1; k < max_len; ++k)
        for (unsigned node = 0; node < nn; ++node) {
            const double d0 = dist[k][node];
            if (!(d0 < best))
                continue;
            const unsigned a = node / unsigned(ns), c = node % unsigned(ns);
            for (unsigned ba = 0; ba < nb; ++ba)
                for (unsigned bc = 0; bc < nb; ++bc) {
                    const double d = d0 + w[(a * nb + ba) * se + c * nb + bc];
                    if (!(d < best))
                        continue;
                    const unsigned na = lt.next_state(a, ba), nc = lt.next_state(c, bc);
                    const Back bk{node, ba, bc};
                    if (na == nc) {
                        best = d;
                        best_len = k + 1;
                        best_back = bk;
                    } else if (d < dist[k + 1][na * ns + nc]) {
                        dist[k + 1][na * ns + nc] = d;
                        back[k + 1][na * ns + nc] = bk;
                    }
                }
        }

    if (best_len > 0) {
        ErrorEvent ev;
        ev.kind = EventKind::DivergeMerge;
        ev.distance_sq = best;
        ev.branches_a.resize(best_len);
        ev.branches_b.resize(best_len);
        Back bk = best_back;
        for (std::size_t k = best_len; k-- > 0;) {
            ev.branches_a[k] = bk.ba;
            ev.branches_b[k] = bk.bc;
            if (k > 0)
                bk = back[k][bk.node];
        }
        ev.start_state = bk.node / unsigned(ns);
        unsigned a = ev.start_state, c = ev.start_state;
        ev.states_a.push_back(a);
        ev.states_b.push_back(c);
        for (std::size_t k = 0; k < best_len; ++k) {
            a = lt.next_state(a, ev.branches_a[k]);
            c = lt.next_state(c, ev.branches_b[k]);
            ev.states_a.push_back(a);
            ev.states_b.push_back(c);
        }
        rep.diverge_merge = std::move(ev);
    }
    return rep;
}

inline SearchReport d_free_search(const ProductTrellis& pt, std::size_t max_len = 12,
                                  std::optional<unsigned> start_state = std::nullopt)
{
    return d_free_search(pt.labeled(), max_len, start_state);
}

/// Search-oracle free distance for the 4-state code used by both users at
/// the given powers (unrotated 8-PSK).
inline double search_d_free_sq_4state(const PowerPair& pw, std::size_t max_len = 12)
{
    static const Trellis t = build_ungerboeck_4state();
    static const Constellation c = make_8psk();
    const auto rep = d_free_search(tensor_product(t, t, pw, c, c), max_len);
    return rep.d_free_sq().value_or(std::numeric_limits<double>::infinity());
}

} // namespace tcnoma
