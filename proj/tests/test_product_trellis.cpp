#include <gtest/gtest.h>

#include <map>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "tcnoma/product_trellis.hpp"

using namespace tcnoma;

namespace {

const Trellis& t4()
{
    static const Trellis t = build_ungerboeck_4state();
    return t;
}

ProductTrellis paper_product(PowerPair pw, double rot1 = 0.0)
{
    return tensor_product(t4(), t4(), pw, make_8psk(rot1), make_8psk());
}

} // namespace

TEST(TensorProduct, SixteenStatesFourParallelLabels)
{
    const ProductTrellis pt = paper_product({0.3, 1.0});
    EXPECT_EQ(pt.num_states(), 16u);
    EXPECT_EQ(pt.labeled().branches(), 4u);
    EXPECT_EQ(pt.parallel(), 4u);
    EXPECT_EQ(pt.tail_length(), 2u);
}

TEST(TensorProduct, LabelsAreSuperimposedConstituentLabels)
{
    const PowerPair pw{0.3, 1.0};
    const Constellation c1 = make_8psk(0.4), c2 = make_8psk();
    const ProductTrellis pt = tensor_product(t4(), t4(), pw, c1, c2);
    const LabeledTrellis& lt = pt.labeled();
    for (unsigned s1 = 0; s1 < 4; ++s1)
        for (unsigned s2 = 0; s2 < 4; ++s2)
            for (unsigned b = 0; b < 4; ++b)
                for (unsigned p = 0; p < 4; ++p) {
                    const unsigned s = pt.product_state(s1, s2);
                    const LabelOrigin o = pt.origin(b, p);
                    const Branch& e1 = t4().branch(s1, o.branch1);
                    const Branch& e2 = t4().branch(s2, o.branch2);
                    const cplx want = std::sqrt(0.3) * c1[e1.labels[o.parallel1]] +
                                      std::sqrt(1.0) * c2[e2.labels[o.parallel2]];
                    EXPECT_NEAR(std::abs(lt.label(s, b, p) - want), 0.0, 1e-15);
                    EXPECT_EQ(lt.next_state(s, b), pt.product_state(e1.next_state, e2.next_state));
                }
}

TEST(TensorProduct, EdgeExistsIffBothConstituentEdgesExist)
{
    const ProductTrellis pt = paper_product({0.3, 1.0});
    std::set<std::pair<unsigned, unsigned>> edges1, product_edges;
    for (unsigned s = 0; s < 4; ++s)
        for (unsigned b = 0; b < 2; ++b)
            edges1.emplace(s, t4().branch(s, b).next_state);
    for (unsigned s = 0; s < 16; ++s)
        for (unsigned b = 0; b < 4; ++b)
            product_edges.emplace(s, pt.labeled().next_state(s, b));
    for (unsigned i = 0; i < 16; ++i)
        for (unsigned k = 0; k < 16; ++k) {
            const auto [i1, i2] = pt.split_state(i);
            const auto [k1, k2] = pt.split_state(k);
            const bool want = edges1.count({i1, k1}) && edges1.count({i2, k2});
            EXPECT_EQ(product_edges.count({i, k}) == 1, want) << i << "->" << k;
        }
}

TEST(TensorProduct, ZeroUserOnePowerCollapsesLabels)
{
    const ProductTrellis pt = paper_product({0.0, 1.0});
    const LabeledTrellis& lt = pt.labeled();
    for (unsigned s = 0; s < 16; ++s)
        for (unsigned b = 0; b < 4; ++b) {
            std::vector<cplx> distinct;
            for (unsigned p = 0; p < 4; ++p) {
                const cplx l = lt.label(s, b, p);
                if (std::none_of(distinct.begin(), distinct.end(),
                                 [&](cplx d) { return std::abs(d - l) < 1e-12; }))
                    distinct.push_back(l);
            }
            EXPECT_EQ(distinct.size(), 2u);
        }
}

TEST(TensorProduct, ScalingPowersScalesLabelsBySqrtAlpha)
{
    const ProductTrellis a = paper_product({0.2, 0.7});
    for (double alpha : {0.25, 3.0}) {
        const ProductTrellis b = paper_product({0.2 * alpha, 0.7 * alpha});
        for (std::size_t i = 0; i < a.labeled().labels().size(); ++i)
            EXPECT_NEAR(std::abs(b.labeled().labels()[i] - std::sqrt(alpha) * a.labeled().labels()[i]),
                        0.0, 1e-12);
    }
}

TEST(TensorProduct, PathPairsMapBijectivelyToProductPaths)
{
    const ProductTrellis pt = paper_product({0.3, 1.0});
    for (std::size_t len = 1; len <= 3; ++len) {
        std::map<std::vector<unsigned>, std::pair<std::uint64_t, std::uint64_t>> seen;
        const std::size_t nb = 2 * len;
        for (std::uint64_t w1 = 0; w1 < (1u << nb); ++w1)
            for (std::uint64_t w2 = 0; w2 < (1u << nb); ++w2) {
                const Bits b1 = oracle::bits_of(w1, nb), b2 = oracle::bits_of(w2, nb);
                // walk the product trellis with the combined inputs
                std::vector<unsigned> path;
                unsigned s = 0;
                for (std::size_t k = 0; k < len; ++k) {
                    auto [br1, p1] = step_inputs(t4(), b1, k);
                    auto [br2, p2] = step_inputs(t4(), b2, k);
                    const unsigned b = br1 * 2 + br2, p = p1 * 2 + p2;
                    const LabelOrigin o = pt.origin(b, p);
                    EXPECT_EQ(o, (LabelOrigin{br1, p1, br2, p2}));
                    path.push_back(b * 4 + p);
                    s = pt.labeled().next_state(s, b);
                }
                EXPECT_TRUE(seen.emplace(path, std::pair{w1, w2}).second);
            }
        EXPECT_EQ(seen.size(), std::size_t{1} << (2 * nb));
    }
}

TEST(TensorProduct, TerminatedCodewordsGiveTerminatedProductPath)
{
    const ProductTrellis pt = paper_product({0.3, 1.0});
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Bits b1 = random_bits(12, rng), b2 = random_bits(12, rng);
        const Codeword c1 = encode(t4(), InfoFrame(b1, 6), make_8psk());
        const Codeword c2 = encode(t4(), InfoFrame(b2, 6), make_8psk());
        ASSERT_EQ(c1.states.size(), c2.states.size());
        unsigned s = 0;
        for (std::size_t k = 0; k + 1 < c1.states.size(); ++k) {
            EXPECT_EQ(s, pt.product_state(c1.states[k], c2.states[k]));
            unsigned b1k = 0, b2k = 0;
            for (unsigned b = 0; b < 2; ++b) {
                if (t4().branch(c1.states[k], b).next_state == c1.states[k + 1]) b1k = b;
                if (t4().branch(c2.states[k], b).next_state == c2.states[k + 1]) b2k = b;
            }
            s = pt.labeled().next_state(s, b1k * 2 + b2k);
        }
        EXPECT_EQ(s, 0u);
    }
}

TEST(TensorProduct, TailTableCombinesConstituentTails)
{
    const ProductTrellis pt = paper_product({0.3, 1.0});
    for (unsigned s = 0; s < 16; ++s) {
        const auto [s1, s2] = pt.split_state(s);
        for (std::size_t k = 1; k <= 2; ++k) {
            if (t4().can_reach_zero(s1, k) && t4().can_reach_zero(s2, k))
                EXPECT_EQ(pt.labeled().tail_branch(s, k),
                          t4().tail_input(s1, k) * 2 + t4().tail_input(s2, k));
            else
                EXPECT_EQ(pt.labeled().tail_branch(s, k), unsigned(-1));
        }
    }
}

TEST(TensorProduct, RejectsLabelsOutsideConstellation)
{
    EXPECT_THROW(tensor_product(t4(), t4(), {0.3, 1}, make_qpsk_gray(), make_8psk()),
                 std::invalid_argument);
}

TEST(TensorProduct, DumpFormat)
{
    const ProductTrellis pt = paper_product({0.25, 1.0});
    std::ostringstream o;
    pt.dump(o);
    std::istringstream in(o.str());
    std::string first;
    std::getline(in, first);
    // state 0 branch (0,0): 0.5*{1,-1} + {1,-1}
    EXPECT_EQ(first, "0 -> 0 : 1.500000,0.000000 -0.500000,0.000000 0.500000,0.000000 "
                     "-1.500000,0.000000");
    const std::string text = o.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 64);
}

TEST(Complexity, JointAndSeparate)
{
    EXPECT_EQ(complexity_estimate(t4(), t4(), 100, DetectionMode::Joint), 27200u);
    EXPECT_EQ(complexity_estimate(t4(), t4(), 100, DetectionMode::Separate), 4000u);
    EXPECT_EQ(complexity_estimate(t4(), t4(), 0, DetectionMode::Joint), 0u);
}

TEST(PowerPair, Validation)
{
    EXPECT_THROW(PowerPair(-0.1, 1), std::invalid_argument);
    EXPECT_THROW(PowerPair(0.1, std::nan("")), std::invalid_argument);
    EXPECT_THROW(PowerPair(0.5, 0.5).require_ordered(), std::invalid_argument);
    EXPECT_THROW(PowerPair(0.0, 0.5).require_ordered(), std::invalid_argument);
    EXPECT_THROW(PowerPair(0.3, 1.0).require_ordered(1.0), std::invalid_argument);
    EXPECT_NO_THROW(PowerPair(0.3, 0.7).require_ordered(1.0));
    const PowerPair p = PowerPair::from_ratio(0.25, 2.0);
    EXPECT_NEAR(p.p1, 0.4, 1e-15);
    EXPECT_NEAR(p.p2, 1.6, 1e-15);
}
