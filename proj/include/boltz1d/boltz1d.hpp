#pragma once

#include "core.hpp"
#include "quadrature.hpp"
#include "kernel.hpp"
#include "state.hpp"
#include "collision.hpp"
#include "transport.hpp"
#include "diagnostics.hpp"
#include "integrator.hpp"
#include "inequality_lab.hpp"
#include "config.hpp"
#include "experiment.hpp"
#include "output.hpp"
#include "verify.hpp"
