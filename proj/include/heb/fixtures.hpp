#pragma once

#include <string>
#include <vector>

namespace heb {

// One golden fixture: a directory holding `fixture.json` and its inputs.
struct FixtureResult {
  std::string name;
  std::string path;
  bool passed = false;
  bool expectedFailure = false;  // fixture documents a known-unmet expectation
  std::vector<std::string> diff;  // expected-versus-actual lines on failure
};

FixtureResult run_fixture(const std::string& fixtureDir);

// Every directory below `root` containing a fixture.json, in sorted order.
std::vector<FixtureResult> run_fixtures(const std::string& root);

// A suite passes when every fixture passes, except those marked as expected
// failures, which must fail.
bool suite_ok(const std::vector<FixtureResult>& results);

}  // namespace heb
