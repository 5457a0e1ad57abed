// Application shell: header with store health, queue filters, the review
// queue itself, and the re-acquisition trigger with job polling.

import { ApiClient } from "./api.js";
import { clear, el } from "./dom.js";
import { QueueView } from "./queue.js";
import { showToast } from "./toast.js";

export interface App {
    api: ApiClient;
    queue: QueueView;
    refresh: () => Promise<void>;
    reacquire: () => Promise<void>;
    dispose: () => void;
}

export async function mountApp(root: HTMLElement, api: ApiClient): Promise<App> {
    clear(root);
    const healthNode = el("div", { class: "health", id: "health" });
    const verbFilter = el("input", { class: "verb-filter", id: "verb-filter",
                                     placeholder: "filter by verb key" });
    const statusFilter = el("select", { class: "status-filter", id: "status-filter" });
    for (const value of ["pending", "auto-accepted", "auto-rejected",
                         "human-accepted", "human-rejected", "human-edited", "all"]) {
        statusFilter.append(el("option", { value }, [value]));
    }
    const reacquireButton = el("button", { class: "reacquire", id: "reacquire" },
                               ["re-acquire"]);
    const loadMoreButton = el("button", { class: "load-more", id: "load-more" },
                              ["load more"]);
    const jobNode = el("span", { class: "job-status", id: "job-status" });

    const header = el("header", { class: "topbar" }, [
        el("h1", {}, ["scf-forge review"]),
        healthNode,
        verbFilter,
        statusFilter,
        reacquireButton,
        loadMoreButton,
        jobNode,
    ]);
    const queueRoot = el("main", { class: "queue", id: "queue" });
    root.append(header, queueRoot);

    const app: Partial<App> = { api };
    const queue = new QueueView(api, queueRoot, {
        onEmptyReacquire: () => void app.reacquire?.(),
    });

    async function refreshHealth(): Promise<void> {
        try {
            const health = await api.health();
            healthNode.textContent =
                `store v${health.store_version} · ${health.mode} · ` +
                `config ${health.config_fingerprint}`;
        } catch (err) {
            healthNode.textContent = "service unreachable";
            showToast(`health check failed: ${err instanceof Error ? err.message : err}`,
                      "error");
        }
    }

    async function refresh(): Promise<void> {
        await refreshHealth();
        await queue.load();
    }

    async function pollJob(jobId: string): Promise<void> {
        for (;;) {
            const job = await api.job(jobId);
            jobNode.textContent = `${job.id}: ${job.phase}`;
            if (job.done) {
                if (job.error) {
                    showToast(`re-acquisition failed: ${job.error}`, "error");
                } else {
                    showToast(`re-acquisition done (store v${job.store_version})`, "info");
                    await refresh();
                }
                return;
            }
            await new Promise((resolve) => setTimeout(resolve, 500));
        }
    }

    async function reacquire(): Promise<void> {
        try {
            const started = await api.reacquire({});
            jobNode.textContent = `${started.job_id}: started`;
            await pollJob(started.job_id);
        } catch (err) {
            showToast(`re-acquire rejected: ${err instanceof Error ? err.message : err}`,
                      "error");
        }
    }

    verbFilter.addEventListener("change", () => {
        queue.filters.verb = verbFilter.value.trim() || undefined;
        void queue.load();
    });
    statusFilter.addEventListener("change", () => {
        queue.filters.status = statusFilter.value === "pending"
            ? undefined : statusFilter.value;
        void queue.load();
    });
    reacquireButton.addEventListener("click", () => void reacquire());
    loadMoreButton.addEventListener("click", () => void queue.loadMore());

    app.queue = queue;
    app.refresh = refresh;
    app.reacquire = reacquire;
    app.dispose = () => queue.dispose();
    await refresh();
    return app as App;
}
