#pragma once

#include "cdc/domain_algebra.hpp"
#include "cdc/meta_tier.hpp"
#include "cdc/fiber_store.hpp"
#include "cdc/reindexing.hpp"
#include "cdc/bridges.hpp"
#include "cdc/traversal.hpp"
#include "cdc/neural.hpp"
#include "cdc/kb_format.hpp"
#include "cdc/knowledge_base.hpp"
#include "cdc/phq9.hpp"
#include "cdc/validate.hpp"
#include "cdc/experiments.hpp"
