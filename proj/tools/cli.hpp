#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "manifest.hpp"

namespace beb::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalFailure = 3 };

/// Entry point shared by the executable and the tests. argv[0] is the
/// program name.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

/// Executes a fully specified command, writing its files (and the manifest)
/// into `out_dir` when it is non-empty.
void execute(const RunManifest& manifest, const std::filesystem::path& out_dir, std::ostream& out);

}  // namespace beb::cli
