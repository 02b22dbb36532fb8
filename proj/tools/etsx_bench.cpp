// Benchmark comparing the serial reference drivers against the
// OpenMP-parallel ones on a synthetically enlarged framework.
#include <chrono>
#include <cstdio>
#include <sstream>

#include "CLI11.hpp"
#include "etsx/ets_extract.hpp"
#include "etsx/ir_parse.hpp"

using namespace etsx;
using Clock = std::chrono::steady_clock;

namespace {

// K framework classes, each with a guarded throw, a field mutator pair,
// and a wrapper chain; exercises the full extraction path per signaler.
std::string synth_program(int classes) {
  std::ostringstream os;
  os << "mir/1\n";
  for (int i = 0; i < classes; ++i) {
    std::string cls = "bench.fw.C" + std::to_string(i);
    os << "class " << cls << " framework\n";
    os << "  field state int\n";
    os << "  method check(limit:int) public\n";
    os << "    0: field-load s = " << cls << ".state -> 1\n";
    os << "    1: assign t = s + limit -> 2\n";
    os << "    2: if t <= 0 -> 3 5\n";
    os << "    3: assign e = new IllegalStateException(\"state underflow: \", t) -> 4\n";
    os << "    4: throw e\n";
    os << "    5: return\n";
    os << "  end\n";
    os << "  method drop() public\n";
    os << "    0: field-load s = " << cls << ".state -> 1\n";
    os << "    1: assign t = s - 1 -> 2\n";
    os << "    2: field-store " << cls << ".state = t -> 3\n";
    os << "    3: return\n";
    os << "  end\n";
    os << "  method close() public\n";
    os << "    0: call " << cls << ".drop() -> 1\n";
    os << "    1: return\n";
    os << "  end\n";
    os << "  method wrap(limit:int) public\n";
    os << "    0: call " << cls << ".check(limit) -> 1\n";
    os << "    1: return\n";
    os << "  end\n";
    os << "end\n";
  }
  return os.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"etsx-bench - serial vs parallel extraction"};
  int classes = 400;
  int repeats = 3;
  app.add_option("--classes", classes, "synthetic framework classes (default 400)");
  app.add_option("--repeats", repeats, "timing repetitions (default 3)");
  CLI11_PARSE(app, argc, argv);

  ir::Program program = ir::parse_program(synth_program(classes));
  ets::ExtractConfig config;

  double serial_best = 1e9, parallel_best = 1e9;
  size_t records = 0;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = Clock::now();
    auto s = ets::extract_ets_serial(program, config);
    serial_best = std::min(serial_best, seconds_since(t0));
    auto t1 = Clock::now();
    auto p = ets::extract_ets(program, config);
    parallel_best = std::min(parallel_best, seconds_since(t1));
    if (ets::serialize_store(s) != ets::serialize_store(p)) {
      std::fprintf(stderr, "serial and parallel stores diverged\n");
      return 1;
    }
    records = s.records.size();
  }
  std::printf("classes=%d records=%zu\n", classes, records);
  std::printf("%-10s %10s\n", "driver", "best (s)");
  std::printf("%-10s %10.4f\n", "serial", serial_best);
  std::printf("%-10s %10.4f\n", "parallel", parallel_best);
  std::printf("speedup    %10.2fx\n", serial_best / parallel_best);
  return 0;
}
