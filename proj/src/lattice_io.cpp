#include "latdec/lattice_io.hpp"

#include <sstream>

#include "json.hpp"
#include "latdec/error.hpp"

namespace latdec {

using nlohmann::json;

std::string lattice_to_json(const Lattice& lattice, int indent) {
  json nodes = json::array();
  json edges = json::array();
  json eos = json::array();
  for (NodeId id : lattice.live_nodes()) {
    const auto& n = lattice.node(id);
    nodes.push_back({{"id", id.value},
                     {"token", n.token},
                     {"text", n.text},
                     {"logprob", n.log_prob},
                     {"eos", n.is_eos},
                     {"depth", n.depth}});
    if (n.is_eos) eos.push_back(id.value);
    for (const Edge& e : lattice.out_edges(id))
      edges.push_back({{"src", e.src.value}, {"dst", e.dst.value}, {"kind", e.kind == EdgeKind::gen ? "GEN" : "MRG"}});
  }
  json doc = {{"nodes", std::move(nodes)},
              {"edges", std::move(edges)},
              {"sos", lattice.sos().value},
              {"eos", std::move(eos)},
              {"eos_token", lattice.eos_token()}};
  const auto remap = lattice.remap_pairs();
  if (!remap.empty()) {
    json r = json::array();
    for (const auto& [from, to] : remap) r.push_back({from.value, to.value});
    doc["remap"] = std::move(r);
  }
  return doc.dump(indent);
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing field " + where + "/" + key, 0);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError("wrong type for " + where + "/" + key, 0);
  }
}

}  // namespace

Lattice lattice_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed lattice JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) throw ParseError("lattice JSON must be an object", 0);
  if (field<std::uint32_t>(doc, "sos", "") != 0) throw ParseError("start node must have id 0 (/sos)", 0);

  std::vector<Lattice::RawNode> nodes;
  const auto jn = field<json>(doc, "nodes", "");
  if (!jn.is_array()) throw ParseError("/nodes must be an array", 0);
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string where = "/nodes/" + std::to_string(i);
    Lattice::RawNode r;
    r.id = NodeId{field<std::uint32_t>(jn[i], "id", where)};
    r.token = field<TokenId>(jn[i], "token", where);
    r.text = field<std::string>(jn[i], "text", where);
    r.log_prob = field<double>(jn[i], "logprob", where);
    r.is_eos = field<bool>(jn[i], "eos", where);
    r.depth = field<std::uint32_t>(jn[i], "depth", where);
    nodes.push_back(std::move(r));
  }

  std::vector<Edge> edges;
  const auto je = field<json>(doc, "edges", "");
  if (!je.is_array()) throw ParseError("/edges must be an array", 0);
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string where = "/edges/" + std::to_string(i);
    const auto kind = field<std::string>(je[i], "kind", where);
    if (kind != "GEN" && kind != "MRG") throw ParseError("unknown edge kind at " + where + "/kind", 0);
    edges.push_back(Edge{NodeId{field<std::uint32_t>(je[i], "src", where)},
                         NodeId{field<std::uint32_t>(je[i], "dst", where)},
                         kind == "GEN" ? EdgeKind::gen : EdgeKind::mrg});
  }

  std::vector<std::pair<NodeId, NodeId>> remap;
  if (doc.contains("remap")) {
    for (const auto& pair : doc["remap"]) {
      if (!pair.is_array() || pair.size() != 2) throw ParseError("/remap entries must be [from,to] pairs", 0);
      remap.emplace_back(NodeId{pair[0].get<std::uint32_t>()}, NodeId{pair[1].get<std::uint32_t>()});
    }
  }
  const TokenId eos_token = doc.contains("eos_token") ? field<TokenId>(doc, "eos_token", "") : 1;

  Lattice lat = Lattice::from_parts(std::move(nodes), std::move(edges), std::move(remap), eos_token);
  for (const auto& id : field<json>(doc, "eos", "")) {
    if (!lat.is_live(NodeId{id.get<std::uint32_t>()}) || !lat.node(NodeId{id.get<std::uint32_t>()}).is_eos)
      throw ParseError("/eos lists a node that is not an eos node", 0);
  }
  return lat;
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string lattice_to_dot(const Lattice& lattice) {
  std::ostringstream os;
  os << "digraph lattice {\n  rankdir=LR;\n";
  for (NodeId id : lattice.live_nodes()) {
    const auto& n = lattice.node(id);
    os << "  n" << id.value << " [label=\"" << dot_escape(n.text) << "\"";
    if (n.is_eos) os << ", shape=doublecircle";
    os << "];\n";
  }
  for (NodeId id : lattice.live_nodes()) {
    for (const Edge& e : lattice.out_edges(id)) {
      os << "  n" << e.src.value << " -> n" << e.dst.value;
      if (e.kind == EdgeKind::mrg) os << " [style=dashed]";
      os << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

}  // namespace latdec
