#ifndef CBS_CBS_HPP
#define CBS_CBS_HPP

#include "cbs/bounds.hpp"
#include "cbs/csv.hpp"
#include "cbs/error.hpp"
#include "cbs/harness.hpp"
#include "cbs/plot.hpp"
#include "cbs/selftest.hpp"
#include "cbs/signal_model.hpp"
#include "cbs/strategies.hpp"

#endif // CBS_CBS_HPP
