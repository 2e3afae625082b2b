#pragma once

#include "linqs/core_model.hpp"
#include "linqs/errors.hpp"
#include "linqs/fock_oracle.hpp"
#include "linqs/linalg.hpp"
#include "linqs/model_io.hpp"
#include "linqs/moment_dynamics.hpp"
#include "linqs/rk4.hpp"
