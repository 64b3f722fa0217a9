/** DOM panels: badges, waypoint progress, chat, quick replies, e-stop. */

import { ConsoleViewModel } from "./viewmodel";

export interface PanelActions {
  sendText(text: string): void;
  pressEstop(): void;
  retryLast(): void;
}

export class ConsolePanels {
  private vm: ConsoleViewModel;
  private actions: PanelActions;
  private root: HTMLElement;
  private chatList: HTMLElement;
  private promptBox: HTMLElement;
  private modeBadge: HTMLElement;
  private staleBadge: HTMLElement;
  private speedBadge: HTMLElement;
  private waypointRow: HTMLElement;
  private estopButton: HTMLButtonElement;
  private retryBox: HTMLElement;
  private input: HTMLInputElement;
  private renderedTranscript = 0;
  lastFailedText: string | null = null;

  constructor(root: HTMLElement, vm: ConsoleViewModel, actions: PanelActions) {
    this.vm = vm;
    this.actions = actions;
    this.root = root;
    this.modeBadge = this.byId("mode-badge");
    this.staleBadge = this.byId("stale-badge");
    this.speedBadge = this.byId("speed-badge");
    this.waypointRow = this.byId("waypoints");
    this.chatList = this.byId("chat-list");
    this.promptBox = this.byId("prompt-box");
    this.retryBox = this.byId("retry-box");
    this.estopButton = this.byId("estop") as HTMLButtonElement;
    this.input = this.byId("chat-input") as HTMLInputElement;

    this.estopButton.addEventListener("click", () => this.actions.pressEstop());
    (this.byId("chat-send") as HTMLButtonElement).addEventListener("click", () => {
      const text = this.input.value.trim();
      if (text) {
        this.actions.sendText(text);
        this.input.value = "";
      }
    });
    this.input.addEventListener("keydown", (ev) => {
      if (ev.key === "Enter") {
        const text = this.input.value.trim();
        if (text) {
          this.actions.sendText(text);
          this.input.value = "";
        }
      }
    });
  }

  private byId(id: string): HTMLElement {
    const el = this.root.querySelector(`#${id}`);
    if (!el) throw new Error(`missing element #${id}`);
    return el as HTMLElement;
  }

  render(): void {
    const vm = this.vm;
    this.modeBadge.textContent = `${vm.mode} / ${vm.status}` +
      (vm.trialStatus ? ` (${vm.trialStatus})` : "");
    this.staleBadge.style.display = vm.stale ? "inline-block" : "none";
    this.speedBadge.textContent = `speed x${vm.speedScale.toFixed(1)}`;

    this.waypointRow.innerHTML = "";
    for (const { label, reached } of vm.waypointProgress) {
      const pill = document.createElement("span");
      pill.className = "pill" + (reached ? " reached" : "");
      pill.textContent = label;
      this.waypointRow.appendChild(pill);
    }

    // transcript is append-only; only new lines need DOM nodes
    const lines = vm.transcript;
    if (this.renderedTranscript > lines.length) {
      this.chatList.innerHTML = "";
      this.renderedTranscript = 0;
    }
    for (; this.renderedTranscript < lines.length; this.renderedTranscript++) {
      const line = lines[this.renderedTranscript];
      const div = document.createElement("div");
      div.className = `bubble ${line.speaker}` + (line.pending ? " pending" : "");
      div.textContent = line.text;
      this.chatList.appendChild(div);
    }
    for (let i = 0; i < lines.length; i++) {
      const el = this.chatList.children[i] as HTMLElement | undefined;
      if (el) el.classList.toggle("pending", lines[i].pending);
    }
    this.chatList.scrollTop = this.chatList.scrollHeight;

    this.promptBox.innerHTML = "";
    if (vm.activePrompt) {
      const label = document.createElement("div");
      label.className = "prompt-text";
      label.textContent = vm.activePrompt.text;
      this.promptBox.appendChild(label);
      for (const reply of vm.quickReplies) {
        const btn = document.createElement("button");
        btn.className = "quick-reply";
        btn.dataset.intent = reply.intent;
        btn.textContent = reply.text;
        btn.addEventListener("click", () => this.actions.sendText(reply.text));
        this.promptBox.appendChild(btn);
      }
    }

    this.estopButton.disabled = !vm.estopEnabled || vm.estopLatched;
    this.estopButton.textContent = vm.estopLatched ? "E-STOP (latched)" : "EMERGENCY STOP";

    this.retryBox.innerHTML = "";
    if (this.lastFailedText !== null) {
      const note = document.createElement("span");
      note.textContent = "send failed: ";
      const btn = document.createElement("button");
      btn.textContent = "retry";
      btn.addEventListener("click", () => this.actions.retryLast());
      this.retryBox.appendChild(note);
      this.retryBox.appendChild(btn);
    }
  }
}
