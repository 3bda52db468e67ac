#pragma once

#include "wtineq/core.hpp"
#include "wtineq/measures.hpp"
#include "wtineq/transport.hpp"
#include "wtineq/dependence.hpp"
#include "wtineq/processes.hpp"
#include "wtineq/concentration.hpp"
#include "wtineq/oracle.hpp"
#include "wtineq/io.hpp"
#include "wtineq/cli.hpp"
