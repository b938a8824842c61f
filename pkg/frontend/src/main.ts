import { ApiClient } from "./api.js";
import { geometryToSvg, statusText } from "./render.js";
import { UiSession, KEYS, Key } from "./session.js";

const KEY_LABELS: Record<Key, string> = {
  P: "post",
  F: "friend",
  C: "comment",
  S: "share",
  L: "like all",
  V: "view all",
  R: "prune",
};

export function mount(root: HTMLElement, client = new ApiClient()): UiSession {
  root.innerHTML = `
    <div id="toolbar"></div>
    <pre id="status"></pre>
    <div id="notice"></div>
    <div id="canvas"></div>
  `;
  const toolbar = root.querySelector("#toolbar")!;
  const statusEl = root.querySelector("#status")!;
  const noticeEl = root.querySelector("#notice")!;
  const canvasEl = root.querySelector("#canvas")!;

  const thresholdInput = document.createElement("input");
  thresholdInput.type = "number";
  thresholdInput.id = "threshold";
  thresholdInput.value = "50";
  thresholdInput.min = "0";

  const session = new UiSession(client, (s) => {
    statusEl.textContent = s.state ? statusText(s.state.status) : "loading…";
    noticeEl.textContent =
      s.notice ??
      (s.lastPrunedIds.length
        ? `pruned posts: ${s.lastPrunedIds.join(", ")}`
        : "");
    canvasEl.innerHTML = s.geometry ? geometryToSvg(s.geometry) : "";
    toolbar
      .querySelectorAll("button")
      .forEach((b) => ((b as HTMLButtonElement).disabled = s.pending));
  });

  const threshold = () => {
    const n = parseInt(thresholdInput.value, 10);
    return Number.isFinite(n) && n >= 0 ? n : 50;
  };

  for (const key of KEYS) {
    const btn = document.createElement("button");
    btn.textContent = `${key} — ${KEY_LABELS[key]}`;
    btn.dataset.key = key;
    btn.addEventListener("click", () => void session.press(key, threshold()));
    toolbar.appendChild(btn);
  }
  toolbar.appendChild(thresholdInput);

  document.addEventListener("keydown", (ev) => {
    if (ev.target === thresholdInput) return;
    const key = ev.key.toUpperCase() as Key;
    if ((KEYS as readonly string[]).includes(key)) {
      void session.press(key, threshold());
    }
  });

  void session.refresh();
  return session;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!);
}
