#include <stdlib.h>

void main() {
    char input[32];
    fgets(input, 32, stdin);
    long offset = atol(input);
    printf("%ld\n", offset);
}
