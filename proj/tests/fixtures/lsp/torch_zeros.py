import torch
a = torch.zeros(5)
