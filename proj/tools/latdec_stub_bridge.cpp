// Serves a built-in model over the bridge wire protocol on stdin/stdout.
// Used to exercise the bridge client without any neural dependency.
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "latdec/bridge.hpp"
#include "latdec/builtin_models.hpp"
#include "latdec/error.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"Stub scoring bridge"};
  std::string table, corpus, mode = "normal";
  int order = 2;
  double smoothing = 0.1;
  app.add_option("--table", table, "TableModel JSON file");
  app.add_option("--corpus", corpus, "Markov corpus, one sequence per line");
  app.add_option("--order", order, "Markov order");
  app.add_option("--smoothing", smoothing, "Markov add-delta smoothing");
  app.add_option("--mode", mode, "Fault injection")
      ->check(CLI::IsMember({"normal", "bad-version", "garbage", "silent", "die-after-hello"}));
  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<latdec::ScoringModel> model;
  try {
    if (!table.empty()) {
      std::ifstream in(table);
      std::stringstream ss;
      ss << in.rdbuf();
      model = std::make_unique<latdec::TableModel>(latdec::TableModel::from_json(ss.str()));
    } else if (!corpus.empty()) {
      std::ifstream in(corpus);
      model = std::make_unique<latdec::MarkovModel>(latdec::MarkovModel::train(in, order, smoothing));
    } else {
      std::cerr << "need --table or --corpus\n";
      return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "model load failed: " << e.what() << '\n';
    return 3;
  }

  std::size_t top_k = latdec::kDefaultTopK;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (mode == "silent") continue;
    if (mode == "garbage") {
      std::cout << "not json at all" << std::endl;
      continue;
    }
    json reply;
    try {
      const json req = json::parse(line);
      const std::string op = req.at("op").get<std::string>();
      if (op == "hello") {
        top_k = req.value("k", top_k);
        reply = latdec::wire::hello_response(*model);
        if (mode == "bad-version") reply["version"] = latdec::wire::kProtocolVersion + 1;
      } else if (op == "score") {
        const auto prefix = req.at("prefix").get<std::vector<latdec::TokenId>>();
        const auto source = req.value("source", std::vector<latdec::TokenId>{});
        reply = latdec::wire::score_response(model->score(prefix, source, top_k));
      } else if (op == "bye") {
        std::cout << json{{"ok", true}}.dump() << std::endl;
        return 0;
      } else {
        reply = latdec::wire::error_response("unknown op '" + op + "'");
      }
    } catch (const std::exception& e) {
      reply = latdec::wire::error_response(e.what());
    }
    std::cout << reply.dump() << std::endl;
    if (mode == "die-after-hello") return 0;
  }
  return 0;
}
