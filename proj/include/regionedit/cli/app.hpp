#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace regionedit::cli {

/// Mock "model weights" are frozen: the mock world seed never follows
/// --seed, mirroring how real pretrained backends would not change when a
/// run's RNG seed does.
inline constexpr std::uint64_t kMockWorldSeed = 0xD15EA5EULL;

/// Exit codes: 0 ok, 2 input error, 3 backend error, 64 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace regionedit::cli
