import { el } from "./dom.js";

let container: HTMLElement | null = null;

function ensureContainer(): HTMLElement {
    if (!container || !document.body.contains(container)) {
        container = el("div", { class: "toasts", id: "toasts" });
        document.body.append(container);
    }
    return container;
}

export function showToast(message: string, kind: "error" | "info" = "info"): HTMLElement {
    const toast = el("div", { class: `toast toast-${kind}`, role: "alert" }, [message]);
    ensureContainer().append(toast);
    setTimeout(() => toast.remove(), 6000);
    return toast;
}
