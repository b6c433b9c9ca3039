#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "config.hpp"
#include "ehjb/csv.hpp"

using namespace ehjb;
using namespace ehjb::cli;

namespace {

const std::filesystem::path kSource = EHJB_SOURCE_DIR;

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  std::getline(ss, cell, '|');
  while (std::getline(ss, cell, '|')) {
    const auto b = cell.find_first_not_of(' '), e = cell.find_last_not_of(' ');
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return cells;
}

std::vector<std::vector<std::string>> table_rows() {
  std::istringstream in(read_file(kSource / "docs" / "experiments.md"));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("| ex", 0) == 0) rows.push_back(split_row(line));
  return rows;
}

void expect_number(const std::string& cell, double actual, const std::string& what) {
  EXPECT_NEAR(std::stod(cell), actual, 1e-12 * std::abs(actual)) << what;
}

}  // namespace

TEST(ShippedConfigs, MatchExperimentTable) {
  const auto rows = table_rows();
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& row : rows) {
    ASSERT_EQ(row.size(), 10u) << row[0];
    const std::string& file = row[0];
    const ExperimentConfig c = resolve_config(load_config_file((kSource / "configs" / file).string()));
    EXPECT_EQ(c.benchmark, row[1]) << file;
    expect_number(row[2], c.rho, file + " rho");
    if (row[3] != "-") expect_number(row[3], c.lambda, file + " lambda");
    expect_number(row[4], c.u_min, file + " u_min");
    if (row[5].find("kappa") != std::string::npos) {
      ASSERT_TRUE(c.c_kappa) << file;
      EXPECT_FALSE(c.u_max) << file;
      expect_number(row[5].substr(0, row[5].find(' ')), *c.c_kappa, file + " c_kappa");
      EXPECT_EQ(c.kappa_samples, 2000) << file;
    } else {
      ASSERT_TRUE(c.u_max) << file;
      expect_number(row[5], *c.u_max, file + " u_max");
    }
    if (row[6] != "-") {
      expect_number(row[6], c.langevin.step_size, file + " eta");
      EXPECT_EQ(c.langevin.n_traj, 100) << file;
      EXPECT_EQ(c.langevin.horizon, 1000) << file;
    }
    if (row[7] != "-") expect_number(row[7], *c.tau_fraction, file + " s");
    if (row[8] != "-") EXPECT_EQ(std::to_string(c.train.n_boundary), row[8]) << file;
    if (row[9] != "-") {
      EXPECT_EQ(c.preset, row[9]) << file;
      EXPECT_NEAR(c.train.alpha_res, 1.0 / c.rho, 1e-15) << file;
      EXPECT_EQ(c.train.alpha_bnd, 50.0) << file;
    }
  }
}

TEST(ShippedConfigs, FdReferenceDefaults) {
  const ExperimentConfig c = resolve_config(load_config_file((kSource / "configs" / "ex2_fd_reference.cfg").string()));
  EXPECT_EQ(*c.fd_x_left, -6.0);
  EXPECT_EQ(*c.fd_x_right, 6.0);
  EXPECT_EQ(c.fd_points, 1001);
  EXPECT_EQ(c.fd_eps_u, 1e-4);
  EXPECT_EQ(c.fd_k_max, 2000);
}

TEST(ShippedConfigs, SweepValues) {
  const ExperimentConfig ex1 = resolve_config(load_config_file((kSource / "configs" / "ex1_cosine_d1.cfg").string()));
  EXPECT_EQ(ex1.sweep_parameter, "problem.lambda");
  ASSERT_EQ(ex1.sweep_values.size(), 5u);
  EXPECT_EQ(ex1.sweep_values.front(), 0.32);
  EXPECT_EQ(ex1.sweep_values.back(), 0.02);
  for (const char* file : {"ex4_easom.cfg", "ex5_hartmann.cfg"}) {
    const ExperimentConfig c = resolve_config(load_config_file((kSource / "configs" / file).string()));
    EXPECT_EQ(c.sweep_parameter, "langevin.s") << file;
    std::vector<double> values;
    for (const auto& v : c.sweep_values) values.push_back(v.get<double>());
    EXPECT_EQ(values, (std::vector<double>{0, 0.0625, 0.125, 0.25, 0.5})) << file;
  }
}
