#include <pthread.h>
#include <unistd.h>

void worker(void* arg) {
    char* user = getlogin();
    printf("%s\n", user);
}

void main() {
    pthread_t tid;
    pthread_create(&tid, NULL, worker, NULL);
    pthread_join(tid, NULL);
}
