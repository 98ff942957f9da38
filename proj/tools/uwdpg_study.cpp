// Command-line driver for convergence studies; see --help for the flags.
#include "uwdpg/study.hpp"

#include <exception>
#include <iostream>

int main(int argc, char** argv) {
  try {
    const std::vector<std::string> args(argv + 1, argv + argc);
    const uwdpg::StudyConfig cfg = uwdpg::parse_config(args);
    if (cfg.help) {
      std::cout << cfg.help_text;
      return 0;
    }
    const uwdpg::StudyResult result = uwdpg::run_study(cfg);
    if (cfg.out.empty())
      uwdpg::write_csv(result.rows, std::cout);
    else
      uwdpg::write_csv(result.rows, cfg.out);
    if (result.converged)
      std::cerr << "estimator vanished; stopped after " << result.rows.size()
                << " steps\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
