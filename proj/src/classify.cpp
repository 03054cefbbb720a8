#include "semidl/decomposition.hpp"
#include "semidl/program.hpp"

namespace semidl {

Classification classify(const Program& program) {
    Classification c;
    c.monadic = program.arity_bound == 1;
    c.linear = c.chain = c.rulewise_acyclic = c.rulewise_free_connex = true;
    for (const auto& rule : program.rules) {
        for (const auto& body : rule.bodies) {
            c.linear = c.linear && body.idb_atom_count() <= 1;
            c.chain = c.chain && is_chain_query(body);
            auto gyo = gyo_join_tree(build_hypergraph(body));
            if (const auto* tree = std::get_if<JoinTree>(&gyo)) {
                c.rulewise_free_connex = c.rulewise_free_connex &&
                                         free_connex_root(*tree, body.head, body.num_vars()).has_value();
            } else {
                c.rulewise_acyclic = false;
                c.rulewise_free_connex = false;
            }
        }
    }
    return c;
}

} // namespace semidl
