// Copyright 2026 The rqlkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Writes the synthetic fixture corpus shipped under data/.
//
//   rqlkit-synth --schema data/abdominopelvic.schema --count 88 --seed 7
//   rqlkit-synth ... --perturb 0.05 --perturb-seed 11   # second annotator

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rqlkit/corpus.hpp"
#include "rqlkit/schema.hpp"
#include "rqlkit/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a templated synthetic report corpus"};
  std::string schema_path;
  rqlkit::SynthOptions opt;
  double perturb = 0.0;
  std::uint64_t perturb_seed = 1;
  app.add_option("--schema", schema_path, "Schema file")->required();
  app.add_option("--count", opt.count, "Number of reports");
  app.add_option("--seed", opt.seed, "Random seed")->required();
  app.add_option("--perturb", perturb, "Emit a second annotation with this re-draw rate")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--perturb-seed", perturb_seed, "Seed for --perturb");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(schema_path);
    if (!in) throw rqlkit::IoError("cannot open '" + schema_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const rqlkit::SchemaSet schema = rqlkit::parse_schema(ss.str());
    auto records = rqlkit::synthesize_corpus(schema, opt);
    if (perturb > 0.0)
      records = rqlkit::perturb_annotations(records, schema, perturb, perturb_seed);
    rqlkit::write_corpus(records, std::cout);
  } catch (const rqlkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
