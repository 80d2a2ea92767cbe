#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ergowass/plot.hpp"

using namespace ergowass;

namespace {
std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "ergowass_test_plot";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::filesystem::remove(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream s;
  s << is.rdbuf();
  return s.str();
}

const std::vector<std::pair<double, double>> kRows{{64, 0.1}, {128, 0.05}, {256, 0.026}};

RateResult half() {
  RateResult r;
  r.exponent = 0.5;
  return r;
}
}  // namespace

TEST(Plot, ThreeRowsGiveWellFormedSvg) {
  const auto path = scratch("three.svg");
  ASSERT_TRUE(emit_plot(path.string(), kRows, half()));
  ASSERT_TRUE(std::filesystem::exists(path));
  boost::property_tree::ptree tree;
  std::ifstream is(path);
  ASSERT_NO_THROW(boost::property_tree::read_xml(is, tree));
  EXPECT_EQ(tree.get<std::string>("svg.<xmlattr>.version"), "1.1");
  int circles = 0;
  for (const auto& [tag, node] : tree.get_child("svg")) circles += tag == "circle" ? 1 : 0;
  EXPECT_EQ(circles, 3);
  const auto text = slurp(path);
  EXPECT_NE(text.find("fit slope"), std::string::npos);
  EXPECT_NE(text.find("theory T^-0.5"), std::string::npos);
}

TEST(Plot, ByteIdenticalForSameInput) {
  const auto a = scratch("a.svg"), b = scratch("b.svg");
  emit_plot(a.string(), kRows, half());
  emit_plot(b.string(), kRows, half());
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

TEST(Plot, TooFewRowsWritesNothing) {
  const auto path = scratch("empty.svg");
  EXPECT_FALSE(emit_plot(path.string(), {}, half()));
  EXPECT_FALSE(emit_plot(path.string(), {{64, 0.1}}, half()));
  EXPECT_FALSE(std::filesystem::exists(path));
  std::ostringstream os;
  EXPECT_FALSE(write_plot_svg(os, {}, half()));
  EXPECT_TRUE(os.str().empty());
}

TEST(Plot, RejectsNonPositiveMeans) {
  std::ostringstream os;
  EXPECT_THROW(write_plot_svg(os, {{64, 0.1}, {128, 0.0}}, half()), Error);
}

TEST(Plot, HandlesLogCorrectedTheoryAndFlatData) {
  RateResult r = half();
  r.log_power = 1.0;
  std::ostringstream os;
  EXPECT_TRUE(write_plot_svg(os, {{4, 1.0}, {8, 1.0}, {16, 1.0}}, r));
  EXPECT_EQ(os.str().find("nan"), std::string::npos);
  EXPECT_EQ(os.str().find("inf"), std::string::npos);
}
