#pragma once

#include "citerec/cf.hpp"
#include "citerec/citeparse.hpp"
#include "citerec/context.hpp"
#include "citerec/corpus.hpp"
#include "citerec/eval.hpp"
#include "citerec/fusion.hpp"
#include "citerec/pipeline.hpp"
#include "citerec/windows.hpp"
