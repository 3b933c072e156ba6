// Browser entry point: binds the compose/manage view models to the DOM.

import { ApiClient } from "./api.js";
import { ComposeModel } from "./compose.js";
import { ManageModel } from "./manage.js";
import { TokenStore } from "./tokens.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function formatWhen(ts: number | null): string {
  return ts === null ? "never" : new Date(ts * 1000).toLocaleString();
}

function boot(): void {
  const storage = window.localStorage;
  const savedBase = storage.getItem("latebind.base_url") ?? window.location.origin;

  const baseInput = el<HTMLInputElement>("base-url");
  baseInput.value = savedBase;

  let api = new ApiClient(savedBase);
  const tokens = new TokenStore(storage);

  const textArea = el<HTMLTextAreaElement>("compose-text");
  const bindButton = el<HTMLButtonElement>("bind-button");
  const suggestButton = el<HTMLButtonElement>("suggest-button");
  const suggestionsBox = el<HTMLDivElement>("suggestions");
  const selectionLabel = el<HTMLSpanElement>("selection-label");
  const kindSelect = el<HTMLSelectElement>("kind");
  const ktCheck = el<HTMLInputElement>("kt");
  const maxViews = el<HTMLInputElement>("max-views");
  const afvDays = el<HTMLInputElement>("afv-days");
  const resultBox = el<HTMLDivElement>("bind-result");
  const previewBox = el<HTMLDivElement>("preview");
  const manageList = el<HTMLDivElement>("manage-list");

  const compose = new ComposeModel(api, tokens, renderCompose);
  const manage = new ManageModel(api, tokens, renderManage);

  baseInput.addEventListener("change", () => {
    const base = baseInput.value.trim();
    storage.setItem("latebind.base_url", base);
    api = new ApiClient(base);
    // models keep their reference; simplest is a reload
    window.location.reload();
  });

  function readSettings(): void {
    compose.settings.kind = kindSelect.value as typeof compose.settings.kind;
    compose.settings.kt = ktCheck.checked;
    compose.settings.maxViews = maxViews.value ? Number(maxViews.value) : null;
    compose.settings.afterFirstViewDays = afvDays.value ? Number(afvDays.value) : null;
  }

  function renderCompose(): void {
    bindButton.disabled = !compose.canBind;
    const region = compose.selectionText;
    selectionLabel.textContent = region
      ? `${region.length} chars selected`
      : "select a region to bind";

    suggestionsBox.replaceChildren();
    for (const span of compose.suggestions) {
      const chip = document.createElement("button");
      chip.className = "chip";
      chip.textContent = `${span.category}: ${span.matched_text}`;
      chip.addEventListener("click", () => {
        compose.applySuggestion(span);
        textArea.focus();
        textArea.setSelectionRange(span.start, span.end);
      });
      suggestionsBox.appendChild(chip);
    }

    if (compose.error) {
      resultBox.textContent = `error: ${compose.error}`;
      resultBox.className = "error";
    }
  }

  function renderManage(): void {
    manageList.replaceChildren();
    for (const entry of manage.entries) {
      const card = document.createElement("div");
      card.className = "card";
      const doc = entry.doc;

      const title = document.createElement("h3");
      title.textContent = `${entry.kind} — ${entry.label || entry.contentId.slice(0, 8)}`;
      card.appendChild(title);

      const status = document.createElement("p");
      status.className = "status-line";
      status.textContent = doc
        ? `${doc.status} · views ${doc.view_count} · revisions ${doc.revision_count} · ` +
          `first viewed ${formatWhen(doc.first_viewed_at)} · verdict ${doc.verdict.status}` +
          (doc.verdict.reason ? ` (${doc.verdict.reason})` : "")
        : entry.lastError ?? "loading...";
      card.appendChild(status);

      if (entry.revocationNotice) {
        const notice = document.createElement("p");
        notice.className = "revoked";
        notice.textContent = entry.revocationNotice;
        card.appendChild(notice);
      }

      if (doc && doc.segment_count > 0) {
        const img = document.createElement("img");
        const ext = doc.kt_enabled && doc.kind !== "dashboard" ? "gif" : "png";
        img.src = `${api.baseUrl}/i/${entry.contentId}/0.${ext}?t=${Date.now()}`;
        img.className = "thumb";
        card.appendChild(img);
      }

      const row = document.createElement("div");
      row.className = "row";

      const editBox = document.createElement("input");
      editBox.placeholder = "new text";
      editBox.disabled = entry.editorLocked;
      const editButton = document.createElement("button");
      editButton.textContent = "save edit";
      editButton.disabled = entry.editorLocked;
      editButton.addEventListener("click", () => {
        void manage.edit(entry.contentId, editBox.value).catch(() => undefined);
      });

      const destroyButton = document.createElement("button");
      destroyButton.textContent = "destroy";
      destroyButton.addEventListener("click", () => {
        void manage.destroy(entry.contentId).catch(() => undefined);
      });

      row.append(editBox, editButton, destroyButton);
      card.appendChild(row);
      manageList.appendChild(card);
    }
  }

  textArea.addEventListener("input", () => {
    compose.setText(textArea.value);
  });
  const syncSelection = () =>
    compose.setSelection(textArea.selectionStart ?? 0, textArea.selectionEnd ?? 0);
  textArea.addEventListener("select", syncSelection);
  textArea.addEventListener("keyup", syncSelection);
  textArea.addEventListener("mouseup", syncSelection);

  for (const input of [kindSelect, ktCheck, maxViews, afvDays]) {
    input.addEventListener("change", () => {
      readSettings();
      renderCompose();
    });
  }

  suggestButton.addEventListener("click", () => {
    void compose.suggest();
  });

  bindButton.addEventListener("click", () => {
    readSettings();
    void compose.bind().then(async (created) => {
      resultBox.className = "";
      resultBox.textContent = `bound ${created.content_id}; snippet copied to clipboard`;
      previewBox.innerHTML = created.html_snippet;
      try {
        await navigator.clipboard.writeText(created.html_snippet);
      } catch {
        resultBox.textContent = `bound ${created.content_id}; copy the snippet below manually`;
        const pre = document.createElement("pre");
        pre.textContent = created.html_snippet;
        resultBox.appendChild(pre);
      }
      manage.loadFromStore();
      await manage.refreshAll();
    });
  });

  manage.loadFromStore();
  void manage.refreshAll();
  manage.startPolling(5000);
}

document.addEventListener("DOMContentLoaded", boot);
