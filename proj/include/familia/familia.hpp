#pragma once

#include "familia/alias_table.hpp"
#include "familia/corpus.hpp"
#include "familia/error.hpp"
#include "familia/model_store.hpp"
#include "familia/rng.hpp"
#include "familia/sampler.hpp"
#include "familia/semantics.hpp"
#include "familia/svdfeature.hpp"
#include "familia/topic_model.hpp"
#include "familia/twe.hpp"
