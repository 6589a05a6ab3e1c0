#include "support.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "asyncdoc/log.hpp"

namespace asyncdoc::testing {

namespace {
const bool logging_ready = (init_logging(), true);
}

std::string random_string(Rng& rng, std::string_view alphabet, std::size_t min, std::size_t max) {
  const std::size_t n = min + pick(rng, max - min + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += alphabet[pick(rng, alphabet.size())];
  return out;
}

yxml::Body random_body(Rng& rng, int depth) {
  static constexpr std::string_view name_chars = "abcxyz:0_-";
  static constexpr std::string_view text_chars = "ab <>&=\n\t\"'\x7f\x01\xc3\xa9";
  yxml::Body body;
  const std::size_t n = pick(rng, 4);
  for (std::size_t i = 0; i < n; ++i) {
    if (depth <= 0 || coin(rng, 0.4)) {
      body.push_back(yxml::Tree::text(random_string(rng, text_chars, 0, 6)));
      continue;
    }
    yxml::Attributes attributes;
    std::set<std::string> keys;
    const std::size_t attrs = pick(rng, 3);
    for (std::size_t a = 0; a < attrs; ++a) {
      auto key = random_string(rng, name_chars, 1, 4);
      if (!keys.insert(key).second) continue;
      attributes.emplace_back(key, random_string(rng, "v=1 \n", 0, 4));
    }
    body.push_back(yxml::Tree::element(random_string(rng, name_chars, 1, 5), std::move(attributes),
                                       random_body(rng, depth - 1)));
  }
  return body;
}

std::string random_proof_text(Rng& rng, std::size_t pieces) {
  static const std::vector<std::string> atoms = {
      "Lemma l : 1 + 1 = 2.", "Proof.", "idtac.", "reflexivity.", "Qed.", "Check l.", "Definition d := 3 * 4.",
      "apply List.app_assoc.", "x", "..", "...", ".", "(*", "*)", "(* c *)", "\"", "\"s.\"", "\"\"", " ", "\n",
      "\t", "  ", "a.b", "1.5", "Check d. ", "(* (* . *) *)", "*", "(", ")",
  };
  std::string out;
  for (std::size_t i = 0; i < pieces; ++i) {
    out += atoms[pick(rng, atoms.size())];
    if (coin(rng, 0.3)) out += coin(rng) ? " " : "\n";
  }
  return out;
}

std::string fixture_path(const std::string& relative) { return std::string(ASYNCDOC_FIXTURES_DIR) + "/" + relative; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream content;
  content << in.rdbuf();
  return content.str();
}

} // namespace asyncdoc::testing
