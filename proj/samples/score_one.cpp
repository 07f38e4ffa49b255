// Scores one model answer against a hand-made ground truth and prints every metric.
//   score_one            uses the built-in answer
//   score_one file.txt   scores the text in file.txt instead
#include <fstream>
#include <iostream>
#include <sstream>

#include "fc2t/metrics.hpp"
#include "fc2t/parse.hpp"
#include "fc2t/scoring.hpp"

int main(int argc, char** argv) {
  using namespace fc2t;
  DataTable truth;
  truth.id = "demo";
  truth.row_headers = {"2018", "2019", "2020", "2021"};
  truth.col_headers = {"Series A", "Series B"};
  truth.cells = {{6000.0, 3000.0}, {4000.0, 5000.0}, {7000.0, 2000.0}, {8000.0, 9000.0}};

  AxisSpec axis;
  axis.tick_values = {0, 2000, 4000, 6000, 8000, 10000};
  axis.major_interval = 2000;
  axis.minor_estimate_t = 400;

  // Values read correctly but Series A/B swapped in 2019.
  std::string answer =
      "| Year | Series A | Series B |\n|---|---|---|\n| 2018 | 6,000 | 3,000 |\n| 2019 | 5,000 | 4,000 |\n"
      "| 2020 | 7K | 2K |\n| 2021 | 8.00e+3 | 9.00e+3 |\n";
  if (argc > 1) {
    std::ifstream in(argv[1]);
    std::stringstream ss;
    ss << in.rdbuf();
    answer = ss.str();
  }

  const auto parsed = parse_prediction(answer);
  std::cout << "dialect: " << to_string(parsed.diagnostics.dialect_detected) << "\n";
  const ScoreRecord s = score_prediction(truth, parsed.table, axis);
  for (Metric m : kMetrics) std::cout << to_string(m) << " = " << reported_value(s, m) << "\n";
}
