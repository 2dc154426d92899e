#include "kcoddp/pipeline/cli.hpp"

int main(int argc, char** argv) { return kcoddp::pipeline::cli_dispatch(argc, argv); }
