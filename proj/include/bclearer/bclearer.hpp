#ifndef BCLEARER_BCLEARER_HPP
#define BCLEARER_BCLEARER_HPP

// Umbrella header for the bCLEARer pipeline engine.

#include "assimilate.hpp"
#include "collect.hpp"
#include "content_id.hpp"
#include "csv.hpp"
#include "errors.hpp"
#include "evolve_deep.hpp"
#include "evolve_onto.hpp"
#include "fixtures.hpp"
#include "graph.hpp"
#include "graph_io.hpp"
#include "load.hpp"
#include "orchestrator.hpp"
#include "provenance.hpp"
#include "query.hpp"
#include "report_registry.hpp"
#include "sha256.hpp"
#include "unicode.hpp"

#endif
