#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "rmtspec/errors.hpp"
#include "rmtspec/validate.hpp"

using namespace rmtspec;

TEST(Validate, SuiteNames) {
  for (Suite s : {Suite::mp, Suite::tw, Suite::frechet, Suite::bpp, Suite::csn, Suite::gallery})
    EXPECT_EQ(suite_from_string(to_string(s)), s);
  EXPECT_THROW(suite_from_string("everything"), ParameterError);
}

TEST(Validate, SeedDerivationSeparatesStreams) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 2, 4));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(2, 2, 3));
}

TEST(Validate, MpSuitePassesAndSerializes) {
  const SuiteResult r = validate(Suite::mp, 1);
  EXPECT_TRUE(r.pass);
  ASSERT_FALSE(r.checks.empty());
  for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name;
  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j.at("suite"), "mp");
  EXPECT_EQ(j.at("pass"), true);
  EXPECT_FALSE(j.contains("confusion"));
}
