#include <gtest/gtest.h>

#include <cmath>

#include <magedge/gpt.hpp>

using namespace magedge;

namespace {

PotentialConfig landau() {
    PotentialConfig c;
    c.b = 1.0;
    return c;
}

} // namespace

TEST(Gpt, CutoffInvariants) {
    for (double ell : {3.0, 9.0, 25.0}) {
        const auto r = verify_cutoffs(build_cutoffs(ell));
        EXPECT_LT(r.partition_residual, 1e-14);
        EXPECT_LT(r.tilde_residual, 1e-14);
        EXPECT_EQ(r.disjoint_product, 0.0);
        EXPECT_EQ(r.support_violation, 0.0);
    }
    EXPECT_THROW(build_cutoffs(2.0), magedge::domain_error);
}

TEST(Gpt, DerivativeScaling) {
    const auto a = verify_cutoffs(build_cutoffs(9.0)), b = verify_cutoffs(build_cutoffs(36.0));
    EXPECT_NEAR(b.sup_d1_eta0 / a.sup_d1_eta0, 0.5, 0.1);
    EXPECT_NEAR(b.sup_d2_eta0 / a.sup_d2_eta0, 0.25, 0.05);
}

TEST(Gpt, ResidualConverges) {
    const auto cut = build_cutoffs(9.0);
    std::vector<double> res;
    for (double h : {0.2, 0.1}) {
        const auto ge = assemble(GridSpec::edge(6, 10, h, landau()));
        const auto gb = assemble(GridSpec::bulk_window(-6, 6, -6, 10, h, landau()));
        res.push_back(gpt_identity_residual(ge, gb, cut, {2.0, 0.5}, smooth_test_vector(ge, 7)).residual);
    }
    EXPECT_GE(std::log2(res[0] / res[1]), 1.0) << res[0] << " " << res[1];
    EXPECT_LT(res[1], 0.1);
}

TEST(Gpt, DeepBulkVector) {
    const auto cut = build_cutoffs(9.0);
    const double h = 0.2;
    const auto ge = assemble(GridSpec::edge(5, 18, h, landau()));
    const auto gb = assemble(GridSpec::bulk_window(-5, 5, -6, 18, h, landau()));
    CVec f = CVec::Zero(ge.dimension());
    for (int s = 0; s < ge.dimension(); ++s) {
        const auto& p = ge.sites[std::size_t(s)];
        const double r2 = p.x1 * p.x1 + (p.x2 - 14.5) * (p.x2 - 14.5);
        if (p.x2 > 4 * cut.s) f(s) = std::exp(-r2);
    }
    const auto r = gpt_identity_residual(ge, gb, cut, {2.0, 0.5}, f);
    EXPECT_EQ(r.edge_branch_norm, 0.0);
    EXPECT_GT(r.bulk_branch_norm, 0.0);
    EXPECT_LT(r.residual, 0.1);
}

TEST(Gpt, DefectShrinksWithEll) {
    const double h = 0.2;
    const auto ge = assemble(GridSpec::edge(6, 18, h, landau()));
    const auto gb = assemble(GridSpec::bulk_window(-6, 6, -6, 18, h, landau()));
    const CVec f = smooth_test_vector(ge, 3);
    const double w9 = gpt_identity_residual(ge, gb, build_cutoffs(9.0), {2.0, 0.5}, f).W_norm;
    const double w18 = gpt_identity_residual(ge, gb, build_cutoffs(18.0), {2.0, 0.5}, f).W_norm;
    EXPECT_LT(w18, w9);
}

TEST(Gpt, Refusals) {
    const auto ge = assemble(GridSpec::edge(2, 3, 0.2, landau()));
    const auto gb = assemble(GridSpec::bulk_window(-2, 2, -1, 3, 0.2, landau()));
    const auto small = assemble(GridSpec::bulk_window(-2, 2, 1, 3, 0.2, landau()));
    const CVec f = smooth_test_vector(ge, 1);
    EXPECT_THROW(gpt_identity_residual(ge, gb, build_cutoffs(3.0), {2.0, 0.0}, f), magedge::domain_error);
    EXPECT_THROW(gpt_identity_residual(ge, small, build_cutoffs(3.0), {2.0, 0.5}, f), magedge::domain_error);
    EXPECT_THROW(gpt_identity_residual(ge, gb, build_cutoffs(3.0), {2.0, 0.5}, CVec::Zero(ge.dimension())),
                 magedge::domain_error);
}
