#include <mft/cli.hpp>

int main(int argc, char** argv) { return mft::cli::dispatch(argc, argv); }
