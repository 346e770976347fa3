#include "spec_examples.hpp"

namespace riskgraph::testing {

const std::vector<SpecExample>& spec_examples() {
    static const std::vector<SpecExample> all = [] {
        std::vector<SpecExample> v;
        add_core_examples(v);
        add_nn_model_examples(v);
        add_train_eval_examples(v);
        add_cli_examples(v);
        return v;
    }();
    return all;
}

}  // namespace riskgraph::testing
