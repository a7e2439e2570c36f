#include <exception>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  try {
    const gmrf::cli::ParseOutcome outcome = gmrf::cli::parse_args(argc, argv);
    if (outcome.done) return outcome.exit_code;
    return gmrf::cli::run(outcome.config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
