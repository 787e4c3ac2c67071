#include <gtest/gtest.h>

#include <sstream>

#include "tcnoma/experiment.hpp"

using namespace tcnoma;

TEST(NumberList, Forms)
{
    EXPECT_EQ(parse_number_list("1,2.5,-3"), (std::vector<double>{1, 2.5, -3}));
    EXPECT_EQ(parse_number_list("0:6:2"), (std::vector<double>{0, 2, 4, 6}));
    EXPECT_EQ(parse_number_list("7"), (std::vector<double>{7}));
    EXPECT_EQ(parse_number_list("0.05:0.95:0.05").size(), 19u);
    EXPECT_TRUE(parse_number_list("").empty());
    EXPECT_THROW(parse_number_list("1,x"), std::invalid_argument);
    EXPECT_THROW(parse_number_list("0:10:0"), std::invalid_argument);
    EXPECT_THROW(parse_number_list("0:10"), std::invalid_argument);
}

TEST(Config, RoundTrip)
{
    ExperimentConfig c;
    c.schemes = {Scheme::UcNoma, Scheme::Tcma};
    c.p1 = 0.123456789;
    c.rotation = 0.3;
    c.snr_db = {1.5, 3.25};
    c.frames = 17;
    c.seed = 99;
    c.workers = 3;
    c.out = "x.csv";
    c.grid_step = 0.01;
    EXPECT_EQ(parse_config(serialize_config(c)), c);
    EXPECT_EQ(parse_config(serialize_config(ExperimentConfig{})), ExperimentConfig{});
}

TEST(Config, PresetFirstThenOverrides)
{
    const ExperimentConfig c = parse_config("frames = 10\npreset=fig8  # comment\n\np1=0.2\n");
    EXPECT_EQ(c.preset, "fig8");
    EXPECT_EQ(c.frames, 10u);
    EXPECT_DOUBLE_EQ(c.p1, 0.2);
    EXPECT_EQ(c.schemes.size(), 5u);
}

TEST(Config, Rejects)
{
    EXPECT_THROW(parse_config("colour=red\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("frames\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("frames=-1\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("frames=1.5\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("preset=fig10\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("scheme=TC-NOMA-joint,QAM\n"), std::invalid_argument);
    EXPECT_THROW(parse_config("p1=0.1,0.2\n"), std::invalid_argument);
}

TEST(Presets, FigureParameters)
{
    ExperimentConfig c;
    apply_preset(c, "fig7");
    EXPECT_EQ(c.schemes, (std::vector<Scheme>{Scheme::TcJoint, Scheme::TcSeparate, Scheme::Tcma,
                                              Scheme::UcNoma}));
    EXPECT_DOUBLE_EQ(c.p1, 0.1);
    EXPECT_DOUBLE_EQ(c.p2, 1.0);
    EXPECT_EQ(c.snr_db.size(), 11u);

    apply_preset(c, "fig8");
    EXPECT_DOUBLE_EQ(c.p1, 0.3);
    EXPECT_EQ(c.schemes[1], Scheme::TcJointRotate);

    apply_preset(c, "fig9");
    EXPECT_EQ(c.snr_db, (std::vector<double>{16, 18}));
    EXPECT_EQ(sweep_ratios(c).size(), 19u);
    EXPECT_DOUBLE_EQ(c.h1_sq, 2.0);
    EXPECT_DOUBLE_EQ(c.h2_sq, 1.0);
}

TEST(Presets, ShippedConfigFile)
{
    std::ifstream in(std::string(TCNOMA_DATA_DIR) + "/fig8.cfg");
    ASSERT_TRUE(in);
    ExperimentConfig c = defaults_for("simulate");
    apply_key_values(c, parse_key_values(in));
    EXPECT_EQ(c.preset, "fig8");
    EXPECT_EQ(c.frames, 2000u);
}

TEST(Simulate, CsvLayout)
{
    ExperimentConfig c;
    c.schemes = {Scheme::TcJoint, Scheme::UcNoma};
    c.snr_db = {200.0};
    c.frames = 2;
    c.frame_len = 10;
    c.workers = 1;
    std::ostringstream csv;
    const auto recs = cmd_simulate(c, csv);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(csv.str(), "scheme,snr_db,p1,p2,ber_user1,ber_user2,ber_avg,frames,seed\n"
                         "TC-NOMA-joint,200,0.1,1,0.000000e+00,0.000000e+00,0.000000e+00,2,1\n"
                         "UC-NOMA,200,0.1,1,0.000000e+00,0.000000e+00,0.000000e+00,2,1\n");
}

TEST(Simulate, RejectsBadInput)
{
    ExperimentConfig c;
    std::ostringstream csv;
    c.snr_db.clear();
    EXPECT_THROW(cmd_simulate(c, csv), std::invalid_argument);
    c = ExperimentConfig{};
    c.p1 = 2.0;
    EXPECT_THROW(cmd_simulate(c, csv), std::invalid_argument);
    c = ExperimentConfig{};
    c.h1_sq = 0.5;
    EXPECT_THROW(cmd_simulate(c, csv), std::invalid_argument);
    c = ExperimentConfig{};
    c.trellis_file = "/nonexistent/file.trellis";
    EXPECT_THROW(cmd_simulate(c, csv), std::runtime_error);
    c = ExperimentConfig{};
    c.schemes = {Scheme::TcSeparate};
    c.rotation = 0.2;
    c.frames = 1;
    c.frame_len = 2;
    EXPECT_NO_THROW(cmd_simulate(c, csv)); // rotation only reaches rotating schemes
}

TEST(PowerSweep, RowsPerSchemeRatioSnr)
{
    ExperimentConfig c = defaults_for("power-sweep");
    c.schemes = {Scheme::UcNoma};
    c.ratio_start = 0.1;
    c.ratio_stop = 0.3;
    c.ratio_step = 0.1;
    c.frames = 2;
    c.frame_len = 8;
    std::ostringstream csv;
    const auto recs = cmd_power_sweep(c, csv);
    ASSERT_EQ(recs.size(), 6u);
    EXPECT_NEAR(recs[2].powers.p1 / recs[2].powers.p2, 0.2, 1e-12);
    EXPECT_NEAR(recs[2].powers.total(), 1.0, 1e-15);
    c.ratio_stop = 1.0;
    EXPECT_THROW(cmd_power_sweep(c, csv), std::invalid_argument);
}

TEST(FreeDist, TableAndReport)
{
    ExperimentConfig c = defaults_for("freedist");
    c.grid_step = 0.1;
    std::ostringstream csv, report;
    const auto rows = cmd_freedist(c, csv, report);
    EXPECT_EQ(rows.size(), 10u);
    EXPECT_DOUBLE_EQ(rows.back().ratio, 1.0);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), freedist_csv_header);
    EXPECT_NE(report.str().find("search argmax:      ratio 0.2000"), std::string::npos);
    EXPECT_NE(report.str().find("ratios where search > closed form: 0 of 10"), std::string::npos);
}

TEST(Optimize, Output)
{
    ExperimentConfig c;
    std::ostringstream out;
    const auto [cf, grid] = cmd_optimize(c, out);
    EXPECT_EQ(out.str(), "method,budget,p1,p2,ratio,d_free_sq\n"
                         "closed-form,1,0.193826,0.806174,0.240427,0.775305\n"
                         "grid,1,0.193548,0.806452,0.240000,0.774194\n");
    EXPECT_NEAR(grid.ratio, 0.24, 1e-12);
}
