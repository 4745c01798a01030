#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace nsa {

// A fixture is a .nsa file of top-level forms:
//   (input F)                    required
//   (raw F) (collapsed F) (simplified F)          interpretation expectations
//   (strategy rule...) (checkpoint name F) (final F) (contract F) (expect-error proviso|stuck)
//   (expect internal|normal-form)
// Every expectation is an alpha-equivalence check. The rendered run is also compared
// byte for byte against the sibling .golden file.
struct FixtureOutcome {
    std::string name;   // group/stem
    bool pass = false;
    std::string detail;
    std::string rendered;
};

std::string default_corpus_dir();
std::vector<std::filesystem::path> corpus_files(const std::filesystem::path& dir);
// `bless` rewrites the golden file instead of comparing against it.
FixtureOutcome run_fixture(const std::filesystem::path& file, bool bless = false);
// `only` selects fixtures whose group or stem equals it; empty selects all.
std::vector<FixtureOutcome> run_corpus(const std::filesystem::path& dir, const std::string& only = {},
                                       bool bless = false);

}  // namespace nsa
