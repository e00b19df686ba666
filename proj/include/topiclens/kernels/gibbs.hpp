#pragma once

#include "topiclens/lda.hpp"

namespace topiclens::kernels {

struct GibbsParams {
  double alpha = 0.1;
  double beta = 0.01;
};

// Reference sampler: documents visited in sweep_order, counts updated in place.
void gibbs_sweep_serial(LdaState& state, const GibbsParams& params, int sweep);

// sweep_order is cut into `workers` contiguous shards. Each shard samples against
// a private copy of the word-topic table; integer deltas are summed afterwards.
// The result depends on `workers` but not on thread scheduling, and workers = 1
// reproduces gibbs_sweep_serial bit for bit.
void gibbs_sweep_sharded(LdaState& state, const GibbsParams& params, int sweep, int workers);

}  // namespace topiclens::kernels
