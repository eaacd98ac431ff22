#pragma once

namespace lpg {

/// Entry point of the `lpg` tool. Returns 0 on success, 2 on configuration
/// errors and 3 on numerical failures.
int cli_main(int argc, char** argv);

}  // namespace lpg
