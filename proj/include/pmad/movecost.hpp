#pragma once

#include "pmad/error.hpp"

namespace pmad {

// Unit costs for alignment moves. log_move and model_move must stay
// positive or the worst-case alignment degenerates.
struct MoveCost {
    double sync_move = 0.0;
    double log_move = 1.0;
    double model_move = 1.0;
    double silent_move = 0.0;

    void validate() const {
        if (sync_move < 0 || log_move < 0 || model_move < 0 || silent_move < 0)
            throw ContractError("MoveCost: costs must be non-negative");
        if (log_move <= 0 || model_move <= 0)
            throw ContractError("MoveCost: log_move and model_move must be positive");
    }
};

}  // namespace pmad
