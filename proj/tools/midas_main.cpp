#include "midas/gateway.hpp"

int main(int argc, char** argv) { return midas::cli_run(argc, argv); }
