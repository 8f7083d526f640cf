#pragma once

#include <string>
#include <string_view>

#include "latdec/lattice.hpp"

namespace latdec {

// {nodes:[{id,token,text,logprob,eos,depth}], edges:[{src,dst,kind}], sos, eos:[ids]}
// plus "eos_token" and, when nodes were merged away, "remap":[[from,to],...].
std::string lattice_to_json(const Lattice& lattice, int indent = -1);

// Throws ParseError (byte offset for syntax errors, JSON pointer in the
// message for schema errors) or StructuralError for an invalid graph.
Lattice lattice_from_json(std::string_view text);

// GEN edges solid, MRG edges dashed, eos nodes double circles.
std::string lattice_to_dot(const Lattice& lattice);

}  // namespace latdec
