#include <stdlib.h>

void main() {
    char input[32];
    fgets(input, 32, stdin);
    double ratio = atof(input);
    printf("%f\n", ratio);
}
